"""Quadratic welfare losses, policy tables and FG bargaining grids."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .params import StructuralParams, derive_composites
from .policy import Policy, PolicySpec, Scenario, run_scenario
from .solvers import SimulationPath, SolverError

log = logging.getLogger(__name__)

LOSS_COLUMNS = ("home", "foreign", "world")


@dataclass(frozen=True)
class WelfareWeights:
    lambda_x: float
    lambda_x_star: float
    lambda_r: float
    lambda_r_star: float
    psi_weight: float
    Lambda: float
    beta: float

    def __post_init__(self):
        if self.lambda_x < 0 or self.lambda_x_star < 0:
            raise ValueError("output-gap weights must be nonnegative")
        if not 0 < self.psi_weight < 1:
            raise ValueError("psi_weight must lie in (0, 1)")

    @classmethod
    def from_params(cls, params: StructuralParams) -> WelfareWeights:
        cc = derive_composites(params)
        return cls(
            lambda_x=cc.lambda_x,
            lambda_x_star=cc.lambda_x_star,
            lambda_r=params.lambda_r,
            lambda_r_star=params.lambda_r_star,
            psi_weight=cc.psi_weight,
            Lambda=cc.Lambda,
            beta=params.beta,
        )


def period_losses(path: SimulationPath | np.ndarray, w: WelfareWeights) -> np.ndarray:
    """Per-period (home, foreign, world) losses, shape (T, 3).

    ``path`` may be a :class:`SimulationPath` or an array whose first six
    columns are (pi, pi*, x, x*, r, r*).
    """
    values = path.values if isinstance(path, SimulationPath) else np.asarray(path, float)
    if values.ndim != 2 or values.shape[1] < 6:
        raise ValueError(f"expected a (T, >=6) array of model variables, got shape {values.shape}")
    pi, pis, x, xs, r, rs = values[:, :6].T
    home = pi**2 + w.lambda_x * x**2 + w.lambda_r * r**2
    foreign = pis**2 + w.lambda_x_star * xs**2 + w.lambda_r_star * rs**2
    world = (1 - w.psi_weight) * home + w.psi_weight * foreign - 2 * w.Lambda * x * xs
    return np.column_stack([home, foreign, world])


@dataclass
class WelfareReport:
    discounted: dict[str, float]
    undiscounted: dict[str, float]
    per_period: np.ndarray
    label: str = ""

    @property
    def home(self) -> float:
        return self.discounted["home"]

    @property
    def foreign(self) -> float:
        return self.discounted["foreign"]

    @property
    def world(self) -> float:
        return self.discounted["world"]


def discounted_losses(series: np.ndarray, beta: float, label: str = "") -> WelfareReport:
    """Sum ``beta**(t-1) * loss_t`` over t = 1..T for each loss column."""
    series = np.asarray(series, float)
    if series.ndim == 1:
        series = series[:, None]
    if not np.all(np.isfinite(series)):
        raise ValueError("loss series contains non-finite values")
    weights = beta ** np.arange(series.shape[0])
    disc = weights @ series
    plain = series.sum(axis=0)
    names = LOSS_COLUMNS[: series.shape[1]] if series.shape[1] <= 3 else range(series.shape[1])
    return WelfareReport(
        discounted={k: float(v) for k, v in zip(names, disc)},
        undiscounted={k: float(v) for k, v in zip(names, plain)},
        per_period=series,
        label=label,
    )


def evaluate(scenario: Scenario, solver: str = "occbin") -> WelfareReport:
    path = run_scenario(scenario, solver)
    w = WelfareWeights.from_params(scenario.params)
    return discounted_losses(period_losses(path, w), w.beta, label=scenario.policy.label)


# --- policy tables ---------------------------------------------------------------


@dataclass
class TableRow:
    policy: PolicySpec
    report: WelfareReport | None
    error: str | None = None
    minima: set[str] = field(default_factory=set)


@dataclass
class WelfareTable:
    rows: list[TableRow]
    base: Scenario

    def column(self, name: str) -> np.ndarray:
        return np.array([r.report.discounted[name] if r.report else math.nan for r in self.rows])

    def argmin(self, name: str) -> int | None:
        col = self.column(name)
        if np.all(np.isnan(col)):
            return None
        return int(np.nanargmin(col))


def _evaluate_cell(args):
    scenario, solver = args
    try:
        return evaluate(scenario, solver), None
    except SolverError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _map(tasks, workers: int):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate_cell, tasks))
    return [_evaluate_cell(t) for t in tasks]


def welfare_table(
    family: list[PolicySpec],
    base: Scenario,
    solver: str = "occbin",
    workers: int = 1,
) -> WelfareTable:
    """Evaluate each policy pair on ``base``; flag per-column minima.

    Failed solves are kept as annotated rows and excluded from the minima.
    """
    if not family:
        raise ValueError("policy family is empty")
    tasks = [(base.replace(policy=spec), solver) for spec in family]
    rows = [TableRow(spec, rep, err) for spec, (rep, err) in zip(family, _map(tasks, workers))]
    table = WelfareTable(rows, base)
    for name in LOSS_COLUMNS:
        col = table.column(name)
        if np.all(np.isnan(col)):
            continue
        best = np.nanmin(col)
        for row, v in zip(rows, col):
            if v == best:
                row.minima.add(name)
    for row in rows:
        if row.error:
            log.warning("policy %s failed: %s", row.policy.label, row.error)
    return table


# --- bargaining -------------------------------------------------------------------


@dataclass
class BargainGrid:
    """Losses over home (rows) and foreign (columns) extra-quarter grids.

    ``home_best[j]`` is the index of the home grid value minimising home loss
    given foreign value ``kF[j]``; ``foreign_best[i]`` likewise for foreign
    loss given ``kH[i]``. ``cooperative`` is the (i, j) of minimum world loss.
    """

    kH: tuple[int, ...]
    kF: tuple[int, ...]
    reports: np.ndarray
    world: np.ndarray
    home: np.ndarray
    foreign: np.ndarray
    home_best: list[int | None]
    foreign_best: list[int | None]
    cooperative: tuple[int, int] | None
    home_deviates: bool
    foreign_deviates: bool
    home_gain: float
    foreign_gain: float
    errors: dict[tuple[int, int], str] = field(default_factory=dict)

    def summary(self) -> list[str]:
        lines = []
        if self.cooperative is None:
            return ["no cell solved; nothing to report"]
        i, j = self.cooperative
        lines.append(
            f"cooperative point: kH={self.kH[i]}, kF={self.kF[j]} (world loss {self.world[i, j]:.6g})"
        )
        for jj, b in enumerate(self.home_best):
            if b is not None:
                lines.append(f"home best response to kF={self.kF[jj]}: kH={self.kH[b]}")
        for ii, b in enumerate(self.foreign_best):
            if b is not None:
                lines.append(f"foreign best response to kH={self.kH[ii]}: kF={self.kF[b]}")
        if self.home_deviates:
            b = self.home_best[j]
            lines.append(
                f"home gains {self.home_gain:.6g} by moving from cooperative kH={self.kH[i]} to kH={self.kH[b]}"
            )
        else:
            lines.append("home has no incentive to deviate from the cooperative point")
        if self.foreign_deviates:
            b = self.foreign_best[i]
            lines.append(
                f"foreign gains {self.foreign_gain:.6g} by moving from cooperative kF={self.kF[j]} to kF={self.kF[b]}"
            )
        else:
            lines.append("foreign has no incentive to deviate from the cooperative point")
        for (a, b), msg in sorted(self.errors.items()):
            lines.append(f"warning: cell kH={self.kH[a]}, kF={self.kF[b]} failed ({msg})")
        return lines


def _nanargmin(v: np.ndarray) -> int | None:
    if np.all(np.isnan(v)):
        return None
    return int(np.nanargmin(v))


def analyze_grid(
    kH, kF, world: np.ndarray, home: np.ndarray, foreign: np.ndarray
) -> dict:
    """Best responses, cooperative cell and deviation incentives from loss matrices."""
    home_best = [_nanargmin(home[:, j]) for j in range(home.shape[1])]
    foreign_best = [_nanargmin(foreign[i, :]) for i in range(foreign.shape[0])]
    coop = None
    if not np.all(np.isnan(world)):
        coop = tuple(int(v) for v in np.unravel_index(np.nanargmin(world), world.shape))
    home_dev = foreign_dev = False
    home_gain = foreign_gain = 0.0
    if coop is not None:
        i, j = coop
        hb, fb = home_best[j], foreign_best[i]
        if hb is not None and hb != i and home[hb, j] < home[i, j]:
            home_dev, home_gain = True, float(home[i, j] - home[hb, j])
        if fb is not None and fb != j and foreign[i, fb] < foreign[i, j]:
            foreign_dev, foreign_gain = True, float(foreign[i, j] - foreign[i, fb])
    return dict(
        home_best=home_best,
        foreign_best=foreign_best,
        cooperative=coop,
        home_deviates=home_dev,
        foreign_deviates=foreign_dev,
        home_gain=home_gain,
        foreign_gain=foreign_gain,
    )


def bargain_grid(
    kH_grid,
    kF_grid,
    base: Scenario,
    solver: str = "occbin",
    workers: int = 1,
) -> BargainGrid:
    """Evaluate FG(kH) x FG(kF) on ``base`` (usually a global-trap scenario)."""
    kH, kF = tuple(int(k) for k in kH_grid), tuple(int(k) for k in kF_grid)
    if not kH or not kF:
        raise ValueError("bargaining grids must be nonempty")
    cells = [(i, j) for i in range(len(kH)) for j in range(len(kF))]
    tasks = [
        (base.replace(policy=PolicySpec(Policy.fg(kH[i]), Policy.fg(kF[j]))), solver)
        for i, j in cells
    ]
    results = _map(tasks, workers)
    shape = (len(kH), len(kF))
    reports = np.empty(shape, dtype=object)
    mats = {name: np.full(shape, math.nan) for name in LOSS_COLUMNS}
    errors = {}
    for (i, j), (rep, err) in zip(cells, results):
        reports[i, j] = rep
        if rep is None:
            errors[(i, j)] = err
            log.warning("bargain cell kH=%d kF=%d failed: %s", kH[i], kF[j], err)
            continue
        for name in LOSS_COLUMNS:
            mats[name][i, j] = rep.discounted[name]
    info = analyze_grid(kH, kF, mats["world"], mats["home"], mats["foreign"])
    return BargainGrid(
        kH=kH,
        kF=kF,
        reports=reports,
        world=mats["world"],
        home=mats["home"],
        foreign=mats["foreign"],
        errors=errors,
        **info,
    )
