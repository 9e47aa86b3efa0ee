"""FG bargaining grid under a global trap: best responses and deviation gains.

    python3 scripts/bargain.py --max-k 10
"""

import argparse

import numpy as np

from fgzlb.policy import Scenario
from fgzlb.welfare import bargain_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-k", type=int, default=10)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    ks = range(args.max_k + 1)
    grid = bargain_grid(ks, ks, Scenario(shock="global_trap"), workers=args.workers)
    np.set_printoptions(linewidth=160, precision=3, suppress=False)
    for name in ("world", "home", "foreign"):
        print(f"\n{name} loss x 1e4 (rows kH, columns kF)")
        print(getattr(grid, name) * 1e4)
    print()
    print("\n".join(grid.summary()))


if __name__ == "__main__":
    main()
