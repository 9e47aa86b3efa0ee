"""Command-line front end.

    fgzlb irf     --scenario S.ini [--params P.ini] --out DIR [--plots] [--raw]
    fgzlb welfare --scenario S.ini --out DIR
    fgzlb bargain --scenario S.ini --out DIR [--grid 0:10]
    fgzlb losses  --scenario S.ini --out DIR [--plots]

CSV files are the numeric ground truth; SVGs are redrawn from the CSVs.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .params import ConfigError, ParameterError, StructuralParams, load_params
from .policy import IRF_COLUMNS, Policy, PolicySpec, Scenario, ScenarioFile, irf_table, load_scenario, parse_grid, run_scenario
from .solvers import REGIME_TOL, RESIDUAL_TOL, SolverError
from .welfare import WelfareWeights, bargain_grid, discounted_losses, period_losses, welfare_table

log = logging.getLogger("fgzlb")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

LOSS_HEADER = ("t", "world", "home", "foreign")


@dataclass(frozen=True)
class RunConfig:
    command: str
    scenario_file: ScenarioFile
    out: Path
    plots: bool = False
    raw: bool = False
    solver: str = "occbin"
    workers: int = 1
    grid: str | None = None


# --- formatting -----------------------------------------------------------------


def fmt(v: float) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if np.isnan(v):
        return "nan"
    s = f"{v:.6g}"
    return "0" if s == "-0" else s


def fmt_raw(v: float) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def header_lines(scenario: Scenario, extra: dict[str, str] | None = None) -> list[str]:
    p = scenario.params
    lines = {
        "tool": f"fgzlb {__version__}",
        "params_hash": p.digest(),
        "lambda_r": fmt(p.lambda_r),
        "lambda_r_star": fmt(p.lambda_r_star),
        "sigma": fmt(p.sigma),
        "horizon": str(scenario.horizon),
        "tolerances": f"regime={REGIME_TOL:g} residual={RESIDUAL_TOL:g}",
        "bound": f"home={fmt(p.home_bound)} foreign={fmt(p.foreign_bound)}",
        "shock": scenario.shock,
        "units": "raw log-deviations; losses discounted by beta**(t-1) unless marked",
    }
    lines.update(extra or {})
    return [f"# {k}: {v}" for k, v in lines.items()]


def render_csv(comments: list[str], header, rows, raw: bool = False) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    f = fmt_raw if raw else fmt
    for row in rows:
        w.writerow([f(v) if isinstance(v, (float, int, np.floating, np.integer)) else v for v in row])
    return buf.getvalue()


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    lines = [l for l in path.read_text(encoding="utf-8").splitlines() if not l.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    data = np.array([[float(v) for v in row] for row in reader])
    return header, data


# --- plotting ---------------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "fgzlb"
    return plt


def plot_irfs(csv_paths: dict[str, Path], target: Path) -> None:
    """Overlay IRFs: rows pi, x, r, rn; home left, foreign right."""
    plt = _pyplot()
    fig, axes = plt.subplots(4, 2, figsize=(9, 10), sharex=True)
    rows = [("pi_h", "pi_f"), ("x_h", "x_f"), ("r_h", "r_f"), ("rn_h", "rn_f")]
    for label, path in csv_paths.items():
        header, data = read_csv(path)
        for r, pair in enumerate(rows):
            for c, name in enumerate(pair):
                axes[r, c].plot(data[:, 0], data[:, header.index(name)], label=label)
                axes[r, c].set_title(name)
    axes[0, 0].legend(fontsize="small")
    for ax in axes[-1]:
        ax.set_xlabel("quarter")
    fig.tight_layout()
    fig.savefig(target, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_losses(csv_paths: dict[str, Path], target: Path) -> None:
    plt = _pyplot()
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    for label, path in csv_paths.items():
        header, data = read_csv(path)
        for ax, name in zip(axes, ("world", "home", "foreign")):
            ax.plot(data[:, 0], data[:, header.index(name)], label=label)
            ax.set_title(f"{name} loss")
    axes[0].legend(fontsize="small")
    axes[-1].set_xlabel("quarter")
    fig.tight_layout()
    fig.savefig(target, format="svg", metadata={"Date": None})
    plt.close(fig)


# --- commands ---------------------------------------------------------------------


def _menu(cfg: RunConfig) -> list[PolicySpec]:
    sf = cfg.scenario_file
    if cfg.grid is not None:
        foreign = sf.scenario.policy.foreign
        return [PolicySpec(Policy.fg(k), foreign) for k in parse_grid(cfg.grid)]
    return list(sf.pairs) or [sf.scenario.policy]


def _slug(spec: PolicySpec) -> str:
    return f"{spec.home.label}_{spec.foreign.label}"


def _write_all(files: dict[Path, str], out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for path, text in files.items():
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_irf(cfg: RunConfig) -> list[Path]:
    base = cfg.scenario_file.scenario
    files: dict[Path, str] = {}
    csvs: dict[str, Path] = {}
    for spec in _menu(cfg):
        sc = base.replace(policy=spec)
        path = run_scenario(sc, cfg.solver)
        table = irf_table(path)
        comments = header_lines(sc, {"policy": spec.label, "windows": _windows(path)})
        target = cfg.out / f"irf_{_slug(spec)}.csv"
        files[target] = render_csv(comments, IRF_COLUMNS, table.tolist())
        csvs[spec.label] = target
        if cfg.raw:
            files[target.with_name(target.stem + "_raw.csv")] = render_csv(
                comments, IRF_COLUMNS, table.tolist(), raw=True
            )
    _write_all(files, cfg.out)
    written = list(files)
    if cfg.plots:
        svg = cfg.out / "irf.svg"
        plot_irfs(csvs, svg)
        written.append(svg)
    return written


def _windows(path) -> str:
    w = path.diagnostics.get("windows", {})
    return " ".join(f"{k}={v}" for k, v in sorted(w.items())) or "none"


WELFARE_HEADER = (
    "home_policy", "foreign_policy", "world", "home", "foreign",
    "world_undiscounted", "home_undiscounted", "foreign_undiscounted", "minima", "error",
)


def text_table(table) -> str:
    """Fixed-width table with starred per-column minima."""
    out = [f"{'H policy':<10} {'F policy':<10} {'World loss':>14} {'H loss':>14} {'F loss':>14}"]
    out.append("-" * len(out[0]))
    for row in table.rows:
        cells = []
        for name in ("world", "home", "foreign"):
            if row.report is None:
                cells.append("failed")
            else:
                star = "*" if name in row.minima else " "
                cells.append(f"{fmt(row.report.discounted[name])}{star}")
        out.append(f"{row.policy.home.label:<10} {row.policy.foreign.label:<10} " + " ".join(f"{c:>14}" for c in cells))
    return "\n".join(out) + "\n"


def cmd_welfare(cfg: RunConfig) -> list[Path]:
    base = cfg.scenario_file.scenario
    menu = list(cfg.scenario_file.pairs)
    if cfg.grid is not None:
        menu = _menu(cfg)
    if not menu:
        raise ConfigError("welfare needs a nonempty policy family (pairs = ... or --grid)")
    table = welfare_table(menu, base, cfg.solver, cfg.workers)
    rows = []
    for row in table.rows:
        rep = row.report
        d = [rep.discounted[k] for k in ("world", "home", "foreign")] if rep else [np.nan] * 3
        u = [rep.undiscounted[k] for k in ("world", "home", "foreign")] if rep else [np.nan] * 3
        rows.append([row.policy.home.label, row.policy.foreign.label, *d, *u,
                     "|".join(sorted(row.minima)), row.error or ""])
    comments = header_lines(base)
    files = {cfg.out / "welfare.csv": render_csv(comments, WELFARE_HEADER, rows)}
    if cfg.raw:
        files[cfg.out / "welfare_raw.csv"] = render_csv(comments, WELFARE_HEADER, rows, raw=True)
    files[cfg.out / "welfare.txt"] = "\n".join(comments) + "\n\n" + text_table(table)
    _write_all(files, cfg.out)
    if any(r.error for r in table.rows):
        log.warning("some policies failed; see the error column")
    return list(files)


BARGAIN_HEADER = ("kH", "kF", "world", "home", "foreign", "home_best_response", "foreign_best_response", "cooperative", "error")


def cmd_bargain(cfg: RunConfig) -> list[Path]:
    sf = cfg.scenario_file
    base = sf.scenario
    kH, kF = sf.home_grid, sf.foreign_grid
    if cfg.grid is not None:
        parts = cfg.grid.split("/")
        kH = parse_grid(parts[0])
        kF = parse_grid(parts[1]) if len(parts) > 1 else kH
    if not kH or not kF:
        raise ConfigError("bargain needs home_grid and foreign_grid (or --grid)")
    grid = bargain_grid(kH, kF, base, cfg.solver, cfg.workers)
    rows = []
    for i, h in enumerate(grid.kH):
        for j, f in enumerate(grid.kF):
            rows.append([
                h, f, grid.world[i, j], grid.home[i, j], grid.foreign[i, j],
                int(grid.home_best[j] == i), int(grid.foreign_best[i] == j),
                int(grid.cooperative == (i, j)), grid.errors.get((i, j), ""),
            ])
    comments = header_lines(base)
    files = {cfg.out / "bargain_grid.csv": render_csv(comments, BARGAIN_HEADER, rows)}
    if cfg.raw:
        files[cfg.out / "bargain_grid_raw.csv"] = render_csv(comments, BARGAIN_HEADER, rows, raw=True)
    files[cfg.out / "bargain_summary.txt"] = "\n".join(comments + [""] + grid.summary()) + "\n"
    _write_all(files, cfg.out)
    return list(files)


def cmd_losses(cfg: RunConfig) -> list[Path]:
    base = cfg.scenario_file.scenario
    w = WelfareWeights.from_params(base.params)
    files: dict[Path, str] = {}
    csvs: dict[str, Path] = {}
    for spec in _menu(cfg):
        sc = base.replace(policy=spec)
        path = run_scenario(sc, cfg.solver)
        series = period_losses(path, w)
        rep = discounted_losses(series, w.beta)
        t = np.arange(1, series.shape[0] + 1)
        rows = [[int(tt), s[2], s[0], s[1]] for tt, s in zip(t, series)]
        comments = header_lines(sc, {
            "policy": spec.label,
            "windows": _windows(path),
            "discounted_totals": " ".join(f"{k}={fmt(v)}" for k, v in rep.discounted.items()),
        })
        target = cfg.out / f"losses_{_slug(spec)}.csv"
        files[target] = render_csv(comments, LOSS_HEADER, rows)
        csvs[spec.label] = target
        if cfg.raw:
            files[target.with_name(target.stem + "_raw.csv")] = render_csv(comments, LOSS_HEADER, rows, raw=True)
    _write_all(files, cfg.out)
    written = list(files)
    if cfg.plots:
        svg = cfg.out / "losses.svg"
        plot_losses(csvs, svg)
        written.append(svg)
    return written


COMMANDS = {"irf": cmd_irf, "welfare": cmd_welfare, "bargain": cmd_bargain, "losses": cmd_losses}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fgzlb", description="Two-country ZLB / forward-guidance experiments")
    parser.add_argument("--version", action="version", version=f"fgzlb {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="scenario config file")
        p.add_argument("--params", help="parameter config file ([params] section)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--horizon", type=int, help="override simulation horizon (quarters)")
        p.add_argument("--lambda-r", type=float, help="override lambda_r and lambda_r_star")
        p.add_argument("--grid", help="FG extra-quarter grid, e.g. 0:10 or 0,2,4 (bargain: H/F)")
        p.add_argument("--plots", action="store_true", help="also write SVG plots")
        p.add_argument("--raw", action="store_true", help="also write full-precision CSVs")
        p.add_argument("--solver", choices=("occbin", "stacked"), default="occbin")
        p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def make_config(args: argparse.Namespace) -> RunConfig:
    base = load_params(args.params) if args.params else StructuralParams()
    sf = load_scenario(args.scenario, base)
    sc = sf.scenario
    if args.lambda_r is not None:
        sc = sc.replace(params=sc.params.replace(lambda_r=args.lambda_r, lambda_r_star=args.lambda_r))
    if args.horizon is not None:
        if args.horizon < 2:
            raise ConfigError("--horizon must be at least 2")
        sc = sc.replace(horizon=args.horizon)
    out = Path(args.out)
    if out.exists() and not out.is_dir():
        raise ConfigError(f"output path {out} exists and is not a directory")
    if args.grid is not None:
        for part in args.grid.split("/"):
            parse_grid(part)
    return RunConfig(
        command=args.command,
        scenario_file=ScenarioFile(sc, sf.pairs, sf.home_grid, sf.foreign_grid),
        out=out,
        plots=args.plots,
        raw=args.raw,
        solver=args.solver,
        workers=max(1, args.workers),
        grid=args.grid,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        files = COMMANDS[cfg.command](cfg)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
