"""Perfect-foresight solvers under occasionally binding lower bounds.

Two independent routes are provided:

* :func:`solve_occbin` guesses a regime sequence, solves the time-varying
  decision rules backward from the reference-regime rule, simulates forward
  and updates the guess until it is self-consistent.
* :func:`solve_stacked_newton` stacks all periods into one sparse system in
  which each policy-rate row carries the ``max`` operator, and applies a
  semismooth Newton iteration with a steady-state terminal condition.

Both take innovations at t = 1 only (impulse-response convention) and
return a :class:`SimulationPath`.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .model import LinearModel, Regime

log = logging.getLogger(__name__)

REGIME_TOL = 1e-9
RESIDUAL_TOL = 1e-10
ORACLE_TOL = 1e-6
DEFAULT_HORIZON = 60


class SolverError(RuntimeError):
    """Base class for solver failures."""


class IndeterminacyError(SolverError):
    """More stable roots than predetermined directions: multiple equilibria."""


class ExplosiveError(SolverError):
    """Fewer stable roots than needed: no stable solution."""


class SingularMatrixError(SolverError):
    def __init__(self, message: str, period: int | None = None):
        super().__init__(message)
        self.period = period


class NoConvergenceError(SolverError):
    def __init__(self, message: str, guesses: tuple[np.ndarray, ...] = ()):
        super().__init__(message)
        self.guesses = guesses


class OscillationError(NoConvergenceError):
    """Regime guesses alternate between two sequences."""


class ActiveSetCycleError(NoConvergenceError):
    """Active sets of the stacked Newton iteration revisit an earlier set."""


class HorizonError(SolverError):
    """A constraint still binds in the last period of the horizon."""


@dataclass(frozen=True)
class DecisionRule:
    """Reference-regime rule ``y[t] = P @ y[t-1] + Q @ eps[t]``."""

    P: np.ndarray
    Q: np.ndarray
    eigenvalues: np.ndarray
    residual: float

    @property
    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.P))))

    def irf(self, innovations: np.ndarray, T: int, initial_state: np.ndarray | None = None) -> np.ndarray:
        n = self.P.shape[0]
        y = np.zeros((T, n))
        prev = np.zeros(n) if initial_state is None else np.asarray(initial_state, float)
        for t in range(T):
            y[t] = self.P @ prev + (self.Q @ innovations if t == 0 else 0.0)
            prev = y[t]
        return y


@dataclass(frozen=True)
class RegimeSequence:
    """Binding flags per period (rows, t = 1..T) and constraint (columns).

    ``forced[j]`` is the length W of the prefix window [1, W] in which
    constraint j is held at its bound regardless of the shadow rate.
    """

    flags: np.ndarray
    forced: tuple[int, ...]

    @property
    def T(self) -> int:
        return self.flags.shape[0]

    @classmethod
    def slack(cls, T: int, n_constraints: int) -> RegimeSequence:
        return cls(np.zeros((T, n_constraints), bool), (0,) * n_constraints)

    @classmethod
    def from_windows(cls, T: int, forced: tuple[int, ...]) -> RegimeSequence:
        flags = np.zeros((T, len(forced)), bool)
        for j, w in enumerate(forced):
            flags[: min(w, T), j] = True
        return cls(flags, tuple(forced))

    def last_nonreference(self) -> int:
        """Number of leading periods up to and including the last binding one."""
        rows = np.flatnonzero(self.flags.any(axis=1))
        return int(rows[-1]) + 1 if rows.size else 0

    def spell_end(self, j: int) -> int:
        """Last period (1-based) in which constraint j binds, 0 if never."""
        rows = np.flatnonzero(self.flags[:, j])
        return int(rows[-1]) + 1 if rows.size else 0


@dataclass
class SimulationPath:
    values: np.ndarray
    regimes: RegimeSequence
    shadow: np.ndarray
    variables: tuple[str, ...]
    diagnostics: dict = field(default_factory=dict)

    @property
    def T(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[:, self.variables.index(name)]


def _as_innovations(model: LinearModel, innovations) -> np.ndarray:
    eps = np.zeros(model.n_shocks) if innovations is None else np.asarray(innovations, float)
    if eps.shape != (model.n_shocks,):
        raise ValueError(f"innovations must have shape ({model.n_shocks},), got {eps.shape}")
    return eps


def _forced(model: LinearModel, forced_windows) -> tuple[int, ...]:
    """Normalize forced windows given as a tuple or a {constraint name: W} dict."""
    nc = len(model.constraints)
    if forced_windows is None:
        return (0,) * nc
    if isinstance(forced_windows, dict):
        out = [0] * nc
        for name, w in forced_windows.items():
            out[model.constraint_index(name)] = int(w)
    else:
        out = [int(w) for w in forced_windows]
        if len(out) != nc:
            raise ValueError(f"expected {nc} forced windows, got {len(out)}")
    if any(w < 0 for w in out):
        raise ValueError("forced windows must be nonnegative")
    return tuple(out)


# --- reference regime ---------------------------------------------------------


def solve_reference(model: LinearModel, stable_cutoff: float = 1.0 - 1e-9) -> DecisionRule:
    """First-order rule of the all-slack regime via a QZ decomposition.

    The companion pencil of ``A P^2 + B P + C = 0`` is reordered so stable
    generalized eigenvalues come first; a unique stable rule requires exactly
    ``n`` of them.
    """
    A, B, C, D, _ = model.matrices(model.slack_regime)
    n = model.n
    eye, zero = np.eye(n), np.zeros((n, n))
    # [A 0; 0 I] z[t+1] = [-B -C; I 0] z[t],  z[t] = (y[t], y[t-1])
    F = np.block([[A, zero], [zero, eye]])
    G = np.block([[-B, -C], [eye, zero]])

    def stable(alpha, beta):
        return np.abs(alpha) < stable_cutoff * np.abs(beta)

    S, Tm, alpha, beta, _, Z = sla.ordqz(G, F, sort=stable, output="complex")
    with np.errstate(divide="ignore", invalid="ignore"):
        eig = np.where(np.abs(beta) > 1e-14, np.abs(alpha / beta), np.inf)
    n_stable = int(np.sum(stable(alpha, beta)))
    if n_stable > n:
        raise IndeterminacyError(
            f"{n_stable} stable roots for {n} predetermined directions (indeterminate)"
        )
    if n_stable < n:
        raise ExplosiveError(f"only {n_stable} stable roots, {n} required (no stable solution)")
    Z11, Z21 = Z[:n, :n], Z[n:, :n]
    if np.linalg.cond(Z21) > 1e12:
        raise SingularMatrixError("stable subspace is not invertible in lagged coordinates")
    P = np.real(Z11 @ np.linalg.inv(Z21))
    M = A @ P + B
    try:
        Q = -np.linalg.solve(M, D)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("A P + B is singular") from exc
    resid = float(np.max(np.abs(A @ P @ P + B @ P + C)))
    if resid > 1e-8:
        raise SolverError(f"reference rule residual too large: {resid:.2e}")
    return DecisionRule(P=P, Q=Q, eigenvalues=np.sort(eig), residual=resid)


# --- piecewise-linear simulation ----------------------------------------------


def simulate_with_regimes(
    model: LinearModel,
    regimes: RegimeSequence,
    initial_state=None,
    innovations=None,
    T: int | None = None,
    rule: DecisionRule | None = None,
) -> SimulationPath:
    """Simulate a fixed regime sequence by backward recursion on time-varying rules.

    Beyond the last non-reference period the reference rule applies, so
    ``y[t] = P_t y[t-1] + Q_t eps[t] + c_t`` with ``P_t = P`` and ``c_t = 0``
    there, and for earlier periods

        (A_t P_{t+1} + B_t) y[t] = -C_t y[t-1] - D_t eps[t] - A_t c_{t+1} - k_t.
    """
    rule = rule or solve_reference(model)
    eps = _as_innovations(model, innovations)
    T = regimes.T if T is None else T
    if regimes.T < T:
        raise ValueError(f"regime sequence covers {regimes.T} periods, need {T}")
    n = model.n
    y0 = np.zeros(n) if initial_state is None else np.asarray(initial_state, float)
    last = regimes.last_nonreference()

    Ps: list[np.ndarray] = [None] * last  # type: ignore[list-item]
    Qs: list[np.ndarray] = [None] * last  # type: ignore[list-item]
    cs: list[np.ndarray] = [None] * last  # type: ignore[list-item]
    P_next, c_next = rule.P, np.zeros(n)
    for t in range(last - 1, -1, -1):
        A, B, C, D, k = model.matrices(tuple(regimes.flags[t]))
        M = A @ P_next + B
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu = sla.lu_factor(M, check_finite=False)
        except (ValueError, np.linalg.LinAlgError) as exc:
            raise SingularMatrixError(f"singular recursion matrix at period {t + 1}", t + 1) from exc
        if np.min(np.abs(np.diag(lu[0]))) < 1e-13:
            raise SingularMatrixError(f"singular recursion matrix at period {t + 1}", t + 1)
        Ps[t] = -sla.lu_solve(lu, C)
        Qs[t] = -sla.lu_solve(lu, D)
        cs[t] = -sla.lu_solve(lu, A @ c_next + k)
        P_next, c_next = Ps[t], cs[t]

    y = np.zeros((T, n))
    prev = y0
    for t in range(T):
        shock = eps if t == 0 else None
        if t < last:
            y[t] = Ps[t] @ prev + cs[t] + (Qs[t] @ shock if shock is not None else 0.0)
        else:
            y[t] = rule.P @ prev + (rule.Q @ shock if shock is not None else 0.0)
        prev = y[t]

    innov = np.zeros((T, model.n_shocks))
    innov[0] = eps
    shadow = model.shadow_rates(y, innov, y0)
    flags = regimes.flags[:T]
    path = SimulationPath(
        values=y,
        regimes=RegimeSequence(flags.copy(), regimes.forced),
        shadow=shadow,
        variables=model.variables,
    )
    path.diagnostics["max_residual"] = _max_residual(model, path, innov, y0, rule.P @ y[-1])
    return path


def _max_residual(model: LinearModel, path: SimulationPath, innov, y0, y_after) -> float:
    y = path.values
    T = y.shape[0]
    worst = 0.0
    for t in range(T):
        prev = y0 if t == 0 else y[t - 1]
        nxt = y_after if t == T - 1 else y[t + 1]
        r = model.residuals(tuple(path.regimes.flags[t]), nxt, y[t], prev, innov[t])
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def _bounds(model: LinearModel) -> np.ndarray:
    return np.array([c.bound for c in model.constraints])


def _classify(model: LinearModel, shadow: np.ndarray, forced: tuple[int, ...], tol: float) -> np.ndarray:
    """Binding where the shadow rate is below the bound (ties count as slack)."""
    flags = shadow < _bounds(model)[None, :] - tol
    for j, w in enumerate(forced):
        flags[:w, j] = True
    return flags


def solve_occbin(
    model: LinearModel,
    forced_windows=None,
    innovations=None,
    T: int = DEFAULT_HORIZON,
    max_iter: int = 100,
    tol: float = REGIME_TOL,
    rule: DecisionRule | None = None,
) -> SimulationPath:
    """Guess-and-verify regime iteration.

    The first guess binds only inside the forced windows. Each update binds
    exactly where the simulated shadow rate falls below the bound, plus the
    forced windows. Stops when the guess reproduces itself.
    """
    rule = rule or solve_reference(model)
    forced = _forced(model, forced_windows)
    if any(w >= T for w in forced):
        raise HorizonError(f"forced window {max(forced)} does not fit in horizon {T}")
    regimes = RegimeSequence.from_windows(T, forced)
    history: list[np.ndarray] = [regimes.flags]
    for it in range(1, max_iter + 1):
        path = simulate_with_regimes(model, regimes, innovations=innovations, T=T, rule=rule)
        new = _classify(model, path.shadow, forced, tol)
        if np.array_equal(new, regimes.flags):
            if new[-1].any():
                raise HorizonError(f"constraint binds at the last period of a {T}-quarter horizon")
            path.diagnostics.update(solver="occbin", iterations=it)
            log.debug("occbin converged in %d iterations", it)
            return path
        if len(history) >= 2 and np.array_equal(new, history[-2]):
            raise OscillationError(
                "regime guesses oscillate with period 2", guesses=(history[-1], new)
            )
        history.append(new)
        regimes = RegimeSequence(new, forced)
    raise NoConvergenceError(
        f"no regime fixed point after {max_iter} iterations", guesses=tuple(history[-2:])
    )


# --- stacked-time oracle --------------------------------------------------------


def _stacked_residual(model, Y, eps, y0, forced, active_tol=None):
    """Max-form residual of the stacked system; returns (F, shadow)."""
    TT, n = Y.shape
    A, B, C, D, _ = model.matrices(model.slack_regime)
    Y_next = np.vstack([Y[1:], np.zeros((1, n))])
    Y_prev = np.vstack([y0[None, :], Y[:-1]])
    innov = np.zeros((TT, model.n_shocks))
    innov[0] = eps
    F = Y_next @ A.T + Y @ B.T + Y_prev @ C.T + innov @ D.T
    shadow = np.empty((TT, len(model.constraints)))
    for j, c in enumerate(model.constraints):
        shadow[:, j] = Y[:, c.var] - F[:, c.row]
        target = np.maximum(c.bound, shadow[:, j])
        w = forced[j]
        target[:w] = c.bound
        F[:, c.row] = Y[:, c.var] - target
    return F, shadow


def _stacked_jacobian(model: LinearModel, TT: int, active: np.ndarray) -> sp.csc_matrix:
    n = model.n
    blocks_rows, blocks_cols, blocks_vals = [], [], []

    def put(t_row, t_col, M):
        r, c = np.nonzero(M)
        blocks_rows.append(r + t_row * n)
        blocks_cols.append(c + t_col * n)
        blocks_vals.append(M[r, c])

    cache = {}
    for t in range(TT):
        key = tuple(active[t])
        if key not in cache:
            cache[key] = model.matrices(key)
        A, B, C, _, _ = cache[key]
        put(t, t, B)
        if t + 1 < TT:
            put(t, t + 1, A)
        if t > 0:
            put(t, t - 1, C)
    rows = np.concatenate(blocks_rows)
    cols = np.concatenate(blocks_cols)
    vals = np.concatenate(blocks_vals)
    return sp.csc_matrix((vals, (rows, cols)), shape=(TT * n, TT * n))


def solve_stacked_newton(
    model: LinearModel,
    forced_windows=None,
    innovations=None,
    T: int = DEFAULT_HORIZON,
    max_iter: int = 100,
    tol: float = REGIME_TOL,
    pad: int | None = None,
    initial_state=None,
) -> SimulationPath:
    """Stacked-time semismooth Newton solve with ``y[T'+1] = 0``.

    The system is stacked over ``T' = T + pad`` periods (``pad`` defaults to
    ``T``) so the truncated terminal condition does not contaminate the
    first ``T`` periods that are returned.
    """
    eps = _as_innovations(model, innovations)
    forced = _forced(model, forced_windows)
    pad = T if pad is None else pad
    TT = T + pad
    if any(w >= TT for w in forced):
        raise HorizonError(f"forced window {max(forced)} does not fit in horizon {TT}")
    n = model.n
    y0 = np.zeros(n) if initial_state is None else np.asarray(initial_state, float)
    Y = np.zeros((TT, n))
    active = RegimeSequence.from_windows(TT, forced).flags
    seen: list[np.ndarray] = [active]
    for it in range(1, max_iter + 1):
        F, shadow = _stacked_residual(model, Y, eps, y0, forced)
        J = _stacked_jacobian(model, TT, active)
        try:
            lu = spla.splu(J)
        except RuntimeError as exc:
            raise SingularMatrixError("singular stacked Jacobian") from exc
        Y = Y - lu.solve(F.ravel()).reshape(TT, n)
        F, shadow = _stacked_residual(model, Y, eps, y0, forced)
        new = _classify(model, shadow, forced, tol)
        if np.array_equal(new, active):
            if new[-1].any():
                raise HorizonError("constraint binds at the end of the stacked horizon")
            innov = np.zeros((T, model.n_shocks))
            innov[0] = eps
            path = SimulationPath(
                values=Y[:T].copy(),
                regimes=RegimeSequence(new[:T].copy(), forced),
                shadow=shadow[:T].copy(),
                variables=model.variables,
            )
            path.diagnostics.update(
                solver="stacked_newton",
                iterations=it,
                max_residual=float(np.max(np.abs(F))),
                stacked_horizon=TT,
            )
            return path
        if any(np.array_equal(new, s) for s in seen):
            raise ActiveSetCycleError("active set revisits an earlier iterate", guesses=(active, new))
        seen.append(new)
        active = new
    raise NoConvergenceError(f"stacked Newton did not converge in {max_iter} iterations")


def check_horizon(model: LinearModel, forced_windows=None, innovations=None, T: int = DEFAULT_HORIZON, tol: float = 1e-8) -> float:
    """Max-abs change on the first T periods when the horizon is doubled."""
    short = solve_occbin(model, forced_windows, innovations, T)
    long = solve_occbin(model, forced_windows, innovations, 2 * T)
    diff = float(np.max(np.abs(short.values - long.values[:T])))
    if diff > tol:
        raise HorizonError(f"doubling the horizon changes the path by {diff:.2e}")
    return diff
