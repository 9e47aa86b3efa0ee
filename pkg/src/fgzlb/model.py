"""Regime-indexed linear system for the two-country model.

Each regime is written as

    A @ E_t y[t+1] + B @ y[t] + C @ y[t-1] + D @ eps[t] + k = 0

with y = (pi, pi*, x, x*, r, r*, rn, rn*) and
eps = (e_rn, e_rn*, u, u*, e_m, e_m*). Slack and binding regimes differ
only in the policy-rate rows.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
import numpy as np

from .params import CompositeCoefficients, StructuralParams, derive_composites

VARIABLES = ("pi", "pi_star", "x", "x_star", "r", "r_star", "rn", "rn_star")
SHOCKS = ("e_rn", "e_rn_star", "u", "u_star", "e_m", "e_m_star")
IDX = {name: i for i, name in enumerate(VARIABLES)}
SHOCK_IDX = {name: i for i, name in enumerate(SHOCKS)}

Regime = tuple[bool, ...]


@dataclass(frozen=True)
class Constraint:
    """Lower bound on one policy rate.

    ``row`` is the equation replaced when binding, ``var`` the bounded
    variable. The slack form is the Taylor row stored in the model's base
    matrices; the binding form is ``y[var] - bound = 0``.
    """

    name: str
    row: int
    var: int
    bound: float


@dataclass(frozen=True, eq=False)
class LinearModel:
    params: StructuralParams
    composites: CompositeCoefficients
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    constraints: tuple[Constraint, ...]
    variables: tuple[str, ...] = VARIABLES
    shocks: tuple[str, ...] = SHOCKS
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def n_shocks(self) -> int:
        return len(self.shocks)

    @property
    def slack_regime(self) -> Regime:
        return (False,) * len(self.constraints)

    def matrices(self, regime: Regime) -> tuple[np.ndarray, ...]:
        """Return ``(A, B, C, D, k)`` for a tuple of binding flags."""
        regime = tuple(bool(b) for b in regime)
        if len(regime) != len(self.constraints):
            raise ValueError(
                f"regime has {len(regime)} flags, model has {len(self.constraints)} constraints"
            )
        hit = self._cache.get(regime)
        if hit is not None:
            return hit
        A, B, C, D = (m.copy() for m in (self.A, self.B, self.C, self.D))
        k = np.zeros(self.n)
        for c, binding in zip(self.constraints, regime):
            if binding:
                A[c.row] = 0.0
                B[c.row] = 0.0
                C[c.row] = 0.0
                D[c.row] = 0.0
                B[c.row, c.var] = 1.0
                k[c.row] = -c.bound
        for m in (A, B, C, D, k):
            m.setflags(write=False)
        out = (A, B, C, D, k)
        self._cache[regime] = out
        return out

    def shadow_rates(
        self, path: np.ndarray, innovations: np.ndarray, initial_state: np.ndarray | None = None
    ) -> np.ndarray:
        """Unconstrained policy-rule values along a path.

        ``path`` has shape (T, n) for t = 1..T, ``innovations`` shape
        (T, n_shocks); y[0] defaults to the steady state. Returns shape
        (T, n_constraints).
        """
        T = path.shape[0]
        y0 = np.zeros((1, self.n)) if initial_state is None else np.reshape(initial_state, (1, self.n))
        lagged = np.vstack([y0, path[:-1]])
        out = np.empty((T, len(self.constraints)))
        for j, c in enumerate(self.constraints):
            resid = path @ self.B[c.row] + lagged @ self.C[c.row] + innovations @ self.D[c.row]
            # slack row reads r - shadow = 0 with unit coefficient on r
            out[:, j] = path[:, c.var] - resid
        return out

    def residuals(
        self,
        regime: Regime,
        y_next: np.ndarray,
        y: np.ndarray,
        y_prev: np.ndarray,
        eps: np.ndarray | None = None,
    ) -> np.ndarray:
        A, B, C, D, k = self.matrices(regime)
        eps = np.zeros(self.n_shocks) if eps is None else eps
        return A @ y_next + B @ y + C @ y_prev + D @ eps + k

    def without_constraints(self, names: set[str] | frozenset[str]) -> LinearModel:
        """Drop constraints by name (e.g. a country with no lower bound)."""
        kept = tuple(c for c in self.constraints if c.name not in names)
        return dataclasses.replace(self, constraints=kept, _cache={})

    def constraint_index(self, name: str) -> int:
        for j, c in enumerate(self.constraints):
            if c.name == name:
                return j
        raise KeyError(name)


def build_two_country_model(params: StructuralParams) -> LinearModel:
    """Assemble the eight-equation system for the given parameters."""
    cc = derive_composites(params)
    p = params
    n, m = len(VARIABLES), len(SHOCKS)
    A = np.zeros((n, n))
    B = np.zeros((n, n))
    C = np.zeros((n, n))
    D = np.zeros((n, m))
    pi, pis, x, xs, r, rs, rn, rns = (IDX[v] for v in VARIABLES)

    # NKPCs: pi - beta E pi' - k1 x - k2 x* - u = 0
    A[0, pi] = -p.beta
    B[0, pi] = 1.0
    B[0, x] = -cc.kappa1
    B[0, xs] = -cc.kappa2
    D[0, SHOCK_IDX["u"]] = -1.0

    A[1, pis] = -p.beta
    B[1, pis] = 1.0
    B[1, xs] = -cc.kappa1_star
    B[1, x] = -cc.kappa2_star
    D[1, SHOCK_IDX["u_star"]] = -1.0

    # DIS: x - E x' - vt (E x*' - x*) + (r - E pi' - rn) / sigma0 = 0
    for row, (own, other, infl, rate, nat, vt, s0) in enumerate(
        [
            (x, xs, pi, r, rn, cc.vartheta, cc.sigma0),
            (xs, x, pis, rs, rns, cc.vartheta_star, cc.sigma0_star),
        ],
        start=2,
    ):
        A[row, own] = -1.0
        A[row, other] = -vt
        A[row, infl] = -1.0 / s0
        B[row, own] = 1.0
        B[row, other] = vt
        B[row, rate] = 1.0 / s0
        B[row, nat] = -1.0 / s0

    # Taylor rules (slack form): r - (1-psi_r)(psi_pi pi + psi_x x) - psi_r r_-1 - e = 0
    for row, (rate, infl, gap, sm, ppi, px, shock) in enumerate(
        [
            (r, pi, x, p.psi_r, p.psi_pi, p.psi_x, "e_m"),
            (rs, pis, xs, p.psi_r_star, p.psi_pi_star, p.psi_x_star, "e_m_star"),
        ],
        start=4,
    ):
        B[row, rate] = 1.0
        B[row, infl] = -(1 - sm) * ppi
        B[row, gap] = -(1 - sm) * px
        if sm != 0:
            C[row, rate] = -sm
        D[row, SHOCK_IDX[shock]] = -1.0

    # natural-rate AR(1) states
    B[6, rn] = 1.0
    C[6, rn] = -p.rho_r
    D[6, SHOCK_IDX["e_rn"]] = -1.0
    B[7, rns] = 1.0
    C[7, rns] = -p.rho_r_star
    D[7, SHOCK_IDX["e_rn_star"]] = -1.0

    for mat in (A, B, C, D):
        mat.setflags(write=False)
    constraints = (
        Constraint("home", row=4, var=r, bound=p.home_bound),
        Constraint("foreign", row=5, var=rs, bound=p.foreign_bound),
    )
    return LinearModel(params=p, composites=cc, A=A, B=B, C=C, D=D, constraints=constraints)
