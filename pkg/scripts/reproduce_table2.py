"""Home-only liquidity trap: discounted losses by home policy, foreign without ZLB.

    python3 scripts/reproduce_table2.py [--sigma 2 1 0.5]
"""

import argparse

from fgzlb import StructuralParams
from fgzlb.policy import NOZLB, ZLB, Policy, PolicySpec, Scenario
from fgzlb.welfare import welfare_table

MENU = (0, 2, 4, 5, 9, 10)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma", type=float, nargs="+", default=[2.0, 1.0, 0.5])
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    family = [PolicySpec(ZLB if k == 0 else Policy.fg(k), NOZLB) for k in MENU]
    for sigma in args.sigma:
        base = Scenario(params=StructuralParams(sigma=sigma), shock="home_only")
        table = welfare_table(family, base, workers=args.workers)
        print(f"\nsigma = {sigma:g}   (losses x 1e4, discounted)")
        print(f"{'policy':>8} {'world':>12} {'home':>12} {'foreign':>12}")
        for row in table.rows:
            if row.report is None:
                print(f"{row.policy.home.label:>8}  failed: {row.error}")
                continue
            cells = []
            for col in ("world", "home", "foreign"):
                mark = "*" if col in row.minima else " "
                cells.append(f"{row.report.discounted[col] * 1e4:11.4f}{mark}")
            print(f"{row.policy.home.label:>8} " + " ".join(cells))


if __name__ == "__main__":
    main()
