"""Policy experiments: no lower bound, plain ZLB, and calendar-based FG.

A calendar-based FG(k) policy holds the rate at its bound for the endogenous
ZLB spell of the plain-ZLB solution plus ``k`` announced extra quarters.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass

import numpy as np

from .model import SHOCK_IDX, LinearModel, build_two_country_model
from .params import ConfigError, StructuralParams, params_from_section, read_config
from .solvers import DEFAULT_HORIZON, SimulationPath, solve_occbin, solve_stacked_newton

COUNTRIES = ("home", "foreign")
SHOCK_KINDS = ("home_only", "global_trap", "none")
IRF_COLUMNS = ("t", "pi_h", "pi_f", "x_h", "x_f", "r_h", "r_f", "rn_h", "rn_f")
DEFAULT_FG_MENU = (0, 2, 4, 5, 6, 9, 10)

_POLICY_RE = re.compile(r"^(nozlb|zlb|fg(\d+))$")


@dataclass(frozen=True)
class Policy:
    """One country's policy mode: ``nozlb``, ``zlb`` or ``fg`` with k extra quarters."""

    mode: str
    k: int = 0

    def __post_init__(self):
        if self.mode not in ("nozlb", "zlb", "fg"):
            raise ValueError(f"unknown policy mode {self.mode!r}")
        if not isinstance(self.k, (int, np.integer)) or self.k < 0:
            raise ValueError(f"FG extra quarters must be a nonnegative integer, got {self.k!r}")
        if self.mode != "fg" and self.k != 0:
            raise ValueError(f"{self.mode} takes no extra quarters")

    @classmethod
    def parse(cls, text: str) -> Policy:
        """Parse labels such as ``nozlb``, ``zlb``, ``fg5`` (case-insensitive)."""
        m = _POLICY_RE.match(text.strip().lower().replace(" ", ""))
        if not m:
            raise ConfigError(f"cannot parse policy {text!r} (expected nozlb, zlb or fg<k>)")
        if m.group(2) is not None:
            return cls("fg", int(m.group(2)))
        return cls(m.group(1))

    @classmethod
    def fg(cls, k: int) -> Policy:
        return cls("fg", int(k))

    @property
    def constrained(self) -> bool:
        return self.mode != "nozlb"

    @property
    def extra(self) -> int:
        return self.k if self.mode == "fg" else 0

    @property
    def label(self) -> str:
        return f"fg{self.k}" if self.mode == "fg" else self.mode

    def __str__(self) -> str:
        return self.label


ZLB = Policy("zlb")
NOZLB = Policy("nozlb")


@dataclass(frozen=True)
class PolicySpec:
    home: Policy = ZLB
    foreign: Policy = NOZLB

    @classmethod
    def parse(cls, text: str) -> PolicySpec:
        """Parse ``home:foreign`` pairs, e.g. ``fg5:nozlb``."""
        parts = text.split(":")
        if len(parts) != 2:
            raise ConfigError(f"policy pair {text!r} must look like home:foreign")
        return cls(Policy.parse(parts[0]), Policy.parse(parts[1]))

    def __iter__(self):
        return iter((self.home, self.foreign))

    @property
    def label(self) -> str:
        return f"{self.home.label}:{self.foreign.label}"

    def as_plain_zlb(self) -> PolicySpec:
        return PolicySpec(*(ZLB if p.mode == "fg" else p for p in self))


@dataclass(frozen=True)
class Scenario:
    params: StructuralParams = StructuralParams()
    shock: str = "home_only"
    policy: PolicySpec = PolicySpec()
    horizon: int = DEFAULT_HORIZON

    def __post_init__(self):
        if self.shock not in SHOCK_KINDS:
            raise ValueError(f"shock must be one of {SHOCK_KINDS}, got {self.shock!r}")
        if self.horizon < 2:
            raise ValueError("horizon must be at least 2 quarters")

    def with_policy(self, home: Policy | str, foreign: Policy | str) -> Scenario:
        home = Policy.parse(home) if isinstance(home, str) else home
        foreign = Policy.parse(foreign) if isinstance(foreign, str) else foreign
        return dataclasses.replace(self, policy=PolicySpec(home, foreign))

    def replace(self, **changes) -> Scenario:
        return dataclasses.replace(self, **changes)

    def innovations(self) -> np.ndarray:
        p = self.params
        eps = np.zeros(len(SHOCK_IDX))
        if self.shock == "home_only":
            eps[SHOCK_IDX["e_rn"]] = p.e_NR
        elif self.shock == "global_trap":
            eps[SHOCK_IDX["e_rn"]] = p.e_GL
            eps[SHOCK_IDX["e_rn_star"]] = p.e_GL_star
        return eps

    def model(self) -> LinearModel:
        """Two-country model with constraints removed for NoZLB countries."""
        full = build_two_country_model(self.params)
        drop = {c for c, pol in zip(COUNTRIES, self.policy) if not pol.constrained}
        return full.without_constraints(drop)

    @property
    def label(self) -> str:
        return f"{self.shock}/{self.policy.label}/sigma={self.params.sigma:g}"


_SOLVERS = {"occbin": solve_occbin, "stacked": solve_stacked_newton}


def _solve(scenario: Scenario, windows: dict[str, int], solver: str) -> SimulationPath:
    try:
        fn = _SOLVERS[solver]
    except KeyError:
        raise ValueError(f"unknown solver {solver!r}; choose from {sorted(_SOLVERS)}") from None
    return fn(scenario.model(), windows, scenario.innovations(), scenario.horizon)


def baseline_zlb_exit(scenario: Scenario, solver: str = "occbin") -> dict[str, int]:
    """Endogenous ZLB spell length per country under plain-ZLB policies.

    FG modes are replaced by ZLB; NoZLB countries keep NoZLB and report 0.
    """
    base = scenario.replace(policy=scenario.policy.as_plain_zlb())
    path = _solve(base, {}, solver)
    model = base.model()
    out = {}
    for country in COUNTRIES:
        try:
            j = model.constraint_index(country)
        except KeyError:
            out[country] = 0
        else:
            out[country] = path.regimes.spell_end(j)
    return out


def fg_windows(scenario: Scenario, solver: str = "occbin") -> dict[str, int]:
    """Forced-binding window lengths T0 + k for every FG country."""
    fg = {c: pol for c, pol in zip(COUNTRIES, scenario.policy) if pol.mode == "fg"}
    if not fg:
        return {}
    t0 = baseline_zlb_exit(scenario, solver)
    return {c: t0[c] + pol.k for c, pol in fg.items()}


def run_scenario(scenario: Scenario, solver: str = "occbin") -> SimulationPath:
    """Solve one experiment; FG(k) is a forced window [1, T0 + k]."""
    windows = fg_windows(scenario, solver)
    path = _solve(scenario, windows, solver)
    path.diagnostics["windows"] = windows
    path.diagnostics["scenario"] = scenario.label
    return path


def irf_table(source: Scenario | SimulationPath) -> np.ndarray:
    """Rows of (t, pi, pi*, x, x*, r, r*, rn, rn*) for t = 1..T, raw deviations."""
    path = run_scenario(source) if isinstance(source, Scenario) else source
    t = np.arange(1, path.T + 1, dtype=float)[:, None]
    return np.hstack([t, path.values])


# --- scenario files -------------------------------------------------------------

_SCENARIO_KEYS = {"shock", "home", "foreign", "horizon", "pairs"}
_SECTIONS = {"scenario", "params", "bargain"}
_BARGAIN_KEYS = {"home_grid", "foreign_grid"}


def parse_grid(text: str) -> tuple[int, ...]:
    """``0,2,4`` or ``0:10`` (inclusive range) or a mix: ``0:3,5,9``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ":" in part:
                lo, hi = (int(v) for v in part.split(":"))
                out.extend(range(lo, hi + 1))
            else:
                out.append(int(part))
        except ValueError:
            raise ConfigError(f"cannot parse grid entry {part!r}") from None
    if any(k < 0 for k in out):
        raise ConfigError("grid values must be nonnegative")
    return tuple(dict.fromkeys(out))


@dataclass(frozen=True)
class ScenarioFile:
    """Contents of a scenario config: a base scenario plus optional policy menus."""

    scenario: Scenario
    pairs: tuple[PolicySpec, ...] = ()
    home_grid: tuple[int, ...] = ()
    foreign_grid: tuple[int, ...] = ()


def load_scenario(path, params: StructuralParams | None = None) -> ScenarioFile:
    """Read a ``[scenario]`` file; ``[params]`` entries override ``params``."""
    cfg = read_config(path)
    unknown = set(cfg.sections()) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    if not cfg.has_section("scenario"):
        raise ConfigError(f"{path}: missing [scenario] section")
    sec = cfg["scenario"]
    bad = set(sec.keys()) - _SCENARIO_KEYS
    if bad:
        raise ConfigError(f"unknown key(s) in [scenario]: {', '.join(sorted(bad))}")
    p = params or StructuralParams()
    if cfg.has_section("params"):
        p = params_from_section(cfg["params"], p)
    shock = sec.get("shock", "home_only").strip().lower()
    if shock not in SHOCK_KINDS:
        raise ConfigError(f"shock must be one of {', '.join(SHOCK_KINDS)}")
    try:
        horizon = int(sec.get("horizon", str(DEFAULT_HORIZON)))
    except ValueError:
        raise ConfigError("horizon must be an integer") from None
    spec = PolicySpec(Policy.parse(sec.get("home", "zlb")), Policy.parse(sec.get("foreign", "nozlb")))
    pairs = tuple(PolicySpec.parse(s) for s in sec.get("pairs", "").split(",") if s.strip())
    home_grid: tuple[int, ...] = ()
    foreign_grid: tuple[int, ...] = ()
    if cfg.has_section("bargain"):
        b = cfg["bargain"]
        bad = set(b.keys()) - _BARGAIN_KEYS
        if bad:
            raise ConfigError(f"unknown key(s) in [bargain]: {', '.join(sorted(bad))}")
        home_grid = parse_grid(b.get("home_grid", ""))
        foreign_grid = parse_grid(b.get("foreign_grid", ""))
    try:
        scenario = Scenario(params=p, shock=shock, policy=spec, horizon=horizon)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ScenarioFile(scenario, pairs, home_grid, foreign_grid)
