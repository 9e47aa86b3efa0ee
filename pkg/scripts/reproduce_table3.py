"""Global liquidity trap: welfare losses for the policy families in configs/table3*.ini.

    python3 scripts/reproduce_table3.py
"""

import argparse
from pathlib import Path

from fgzlb.policy import load_scenario
from fgzlb.welfare import welfare_table

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    for path in sorted(CONFIGS.glob("table3*.ini")):
        sf = load_scenario(path)
        table = welfare_table(list(sf.pairs), sf.scenario, workers=args.workers)
        print(f"\n{path.stem}   (losses x 1e4, discounted)")
        print(f"{'policy':>12} {'world':>12} {'home':>12} {'foreign':>12}")
        for row in table.rows:
            if row.report is None:
                print(f"{row.policy.label:>12}  failed: {row.error}")
                continue
            cells = [
                f"{row.report.discounted[c] * 1e4:11.4f}{'*' if c in row.minima else ' '}"
                for c in ("world", "home", "foreign")
            ]
            print(f"{row.policy.label:>12} " + " ".join(cells))


if __name__ == "__main__":
    main()
