"""Monte Carlo check that E[B]/C = 1/(2 ln 2) for the start B of C's random interval."""
import argparse
import math

from onlinesched import experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--draws", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("C", type=float, nargs="*", default=[1.0, 3.7, 100.0])
    args = ap.parse_args()

    target = 1 / (2 * math.log(2))
    for C in args.C:
        b = experiment.interval_start_samples(C, args.draws, args.seed) / C
        se = b.std(ddof=1) / math.sqrt(len(b))
        print(f"C={C:<8g} mean={b.mean():.5f} se={se:.1e} target={target:.5f} "
              f"rel_err={abs(b.mean() - target) / target:.2%}")


if __name__ == "__main__":
    main()
