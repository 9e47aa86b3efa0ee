"""Impulse responses (home-only trap, three sigmas) and global-trap per-period losses.

    python3 scripts/figures.py --out figures/
"""

import argparse
from pathlib import Path

from fgzlb.cli import main as fgzlb

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("figures"))
    args = ap.parse_args()

    params = ["--params", str(CONFIGS / "params.ini")]
    for tag in ("sigma2", "sigma1", "sigma05"):
        code = fgzlb(["irf", *params, "--scenario", str(CONFIGS / f"fig1_{tag}.ini"),
                      "--out", str(args.out / f"irf_{tag}"), "--plots"])
        if code:
            raise SystemExit(code)
    code = fgzlb(["losses", *params, "--scenario", str(CONFIGS / "fig3.ini"),
                  "--out", str(args.out / "losses"), "--plots"])
    if code:
        raise SystemExit(code)
    print("figures written under", args.out)


if __name__ == "__main__":
    main()
