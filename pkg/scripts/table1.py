"""Desk-scale table of empirical competitive ratios for the six algorithm combinations.

    python3 scripts/table1.py --count 10 --n 6 --trials 20 --out results/table1.csv
"""
import argparse
from pathlib import Path

from onlinesched import experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=10, help="instances per combination")
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--trials", type=int, default=20, help="random grids per instance")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="also write the raw rows as CSV")
    args = ap.parse_args()

    rows = experiment.desk_table(args.count, args.n, args.trials, args.seed)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", newline="") as fh:
            experiment.write_csv(rows, fh)
    print(experiment.format_table(rows))


if __name__ == "__main__":
    main()
