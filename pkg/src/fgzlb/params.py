"""Deep parameters of the two-country NK model and their composite coefficients.

Defaults reproduce the benchmark calibration (sigma = 2, symmetric countries
of equal size, Taylor coefficients 1.25 / 0.5, no smoothing).
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path


class ParameterError(ValueError):
    """Raised when parameters are outside their admissible domain."""


class ConfigError(ValueError):
    """Raised for malformed or unknown entries in a config file."""


@dataclass(frozen=True)
class StructuralParams:
    alpha: float = 0.9
    alpha_star: float = 0.9
    beta: float = 0.985
    sigma: float = 2.0
    gamma: float = 0.5
    eta: float = 1.5
    theta: float = 10.0
    psi_r: float = 0.0
    psi_pi: float = 1.25
    psi_x: float = 0.5
    psi_r_star: float = 0.0
    psi_pi_star: float = 1.25
    psi_x_star: float = 0.5
    rho_r: float = 0.8
    rho_r_star: float = 0.8
    # loss weights on the policy rate; not pinned down by the calibration
    lambda_r: float = 0.01
    lambda_r_star: float = 0.01
    e_NR: float = -0.05
    e_GL: float = -0.04
    e_GL_star: float = -0.04
    # lower bound on the rate deviations; None means the zero net rate,
    # i.e. -(1/beta - 1) below steady state
    bound: float | None = None
    bound_star: float | None = None

    @property
    def home_bound(self) -> float:
        return -(1 / self.beta - 1) if self.bound is None else self.bound

    @property
    def foreign_bound(self) -> float:
        return -(1 / self.beta - 1) if self.bound_star is None else self.bound_star

    def replace(self, **changes) -> StructuralParams:
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict[str, float | None]:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        """Short stable hash of all parameter values."""
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class CompositeCoefficients:
    varpi: float
    varpi_star: float
    kappa1: float
    kappa2: float
    kappa1_star: float
    kappa2_star: float
    vartheta: float
    vartheta_star: float
    sigma0: float
    sigma0_star: float
    Omega: float
    psi_weight: float
    lambda_x: float
    lambda_x_star: float
    Lambda: float


def validate_params(params: StructuralParams) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid)."""
    p = params
    out: list[str] = []

    def open_unit(name: str, lo_closed: bool = False) -> None:
        v = getattr(p, name)
        ok = (0.0 <= v < 1.0) if lo_closed else (0.0 < v < 1.0)
        if not ok:
            interval = "[0,1)" if lo_closed else "(0,1)"
            out.append(f"{name} not in {interval}")

    for name in ("alpha", "alpha_star", "rho_r", "rho_r_star"):
        open_unit(name, lo_closed=True)
    open_unit("beta")
    open_unit("gamma")
    if not p.sigma > 0:
        out.append("sigma must be > 0")
    if not p.eta > 0:
        out.append("eta must be > 0")
    if not p.theta > 1:
        out.append("theta must be > 1")
    if not p.sigma - p.gamma * (p.sigma - 1) > 0:
        out.append("divisor sigma0 = sigma - gamma(sigma-1) must be > 0")
    if not p.sigma - (1 - p.gamma) * (p.sigma - 1) > 0:
        out.append("divisor sigma0_star = sigma - (1-gamma)(sigma-1) must be > 0")
    if p.alpha == 0 or p.alpha_star == 0:
        out.append("alpha and alpha_star must be nonzero (Calvo slope divisor)")
    for name in ("psi_r", "psi_r_star"):
        if not 0.0 <= getattr(p, name) < 1.0:
            out.append(f"{name} not in [0,1)")
    for name in ("lambda_r", "lambda_r_star"):
        if getattr(p, name) < 0:
            out.append(f"{name} must be >= 0")
    return out


def _calvo_slope(alpha: float, beta: float) -> float:
    return (1 - alpha) * (1 - alpha * beta) / alpha


def derive_composites(params: StructuralParams) -> CompositeCoefficients:
    """Map deep parameters to NKPC slopes, DIS coefficients and loss weights.

    Raises
    ------
    ParameterError
        If any divisor (alpha, sigma0, Omega, varpi * theta) is zero or the
        parameters otherwise violate their domain.
    """
    problems = validate_params(params)
    if problems:
        raise ParameterError("; ".join(problems))
    p = params
    g, s = p.gamma, p.sigma
    varpi = _calvo_slope(p.alpha, p.beta)
    varpi_star = _calvo_slope(p.alpha_star, p.beta)
    if varpi == 0 or varpi_star == 0:
        raise ParameterError("Calvo slope is zero; prices fully rigid is not supported")
    sigma0 = s - g * (s - 1)
    sigma0_star = s - (1 - g) * (s - 1)
    Omega = (1 - g) / varpi + g / varpi_star
    one_minus_psi = (1 - g) / varpi / Omega
    return CompositeCoefficients(
        varpi=varpi,
        varpi_star=varpi_star,
        kappa1=varpi * (s + p.eta - g * (s - 1)),
        kappa2=varpi * g * (s - 1),
        kappa1_star=varpi_star * (s + p.eta - (1 - g) * (s - 1)),
        kappa2_star=varpi_star * (1 - g) * (s - 1),
        vartheta=g * (s - 1) / sigma0,
        vartheta_star=(1 - g) * (s - 1) / sigma0_star,
        sigma0=sigma0,
        sigma0_star=sigma0_star,
        Omega=Omega,
        psi_weight=1 - one_minus_psi,
        lambda_x=varpi * (s + p.eta - g * (s - 1)) / p.theta,
        lambda_x_star=varpi_star * (s + p.eta - (1 - g) * (s - 1)) / p.theta,
        Lambda=2 * (1 - g) * g * (1 - s) / (varpi * p.theta),
    )


# --- config files -----------------------------------------------------------

_FIELDS = {f.name for f in dataclasses.fields(StructuralParams)}


def read_config(path: str | Path) -> configparser.ConfigParser:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep case: e_NR, Omega...
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parser


def params_from_section(
    section: configparser.SectionProxy, base: StructuralParams | None = None
) -> StructuralParams:
    """Apply ``key = value`` overrides from a config section; unknown keys fail."""
    base = base or StructuralParams()
    changes: dict[str, float | None] = {}
    for key, raw in section.items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown parameter {key!r} in [{section.name}]")
        try:
            if key in ("bound", "bound_star") and raw.strip().lower() in ("none", "steady_state"):
                changes[key] = None
            else:
                changes[key] = float(raw)
        except ValueError:
            raise ConfigError(f"parameter {key!r} is not a number: {raw!r}") from None
    return base.replace(**changes)


def load_params(path: str | Path, base: StructuralParams | None = None) -> StructuralParams:
    """Load a parameter file with a single ``[params]`` section."""
    cfg = read_config(path)
    extra = [s for s in cfg.sections() if s != "params"]
    if extra:
        raise ConfigError(f"unknown section(s) in {path}: {', '.join(extra)}")
    if not cfg.has_section("params"):
        return base or StructuralParams()
    return params_from_section(cfg["params"], base)
