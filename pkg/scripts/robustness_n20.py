"""Validated/found statistics over 20 random GammaShift networks.

Usage: python scripts/robustness_n20.py [--n 20] [--count 20] [--unfiltered]
"""

import argparse
import time

from hopfcert.experiments import complete_pair_seeds, mean_ratio, robustness_sweep


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--amplitude", type=float, default=0.1)
    ap.add_argument("--unfiltered", action="store_true", help="use seeds 0..count-1 as drawn")
    args = ap.parse_args()
    if args.unfiltered:
        seeds = list(range(args.count))
    else:
        seeds = complete_pair_seeds(args.n, args.count, args.amplitude)
    t0 = time.perf_counter()
    outcomes = robustness_sweep(args.n, seeds, args.amplitude)
    print("seed  pairs  found  validated  non-degenerate  max|gamma|")
    for o in outcomes:
        print(f"{o.seed:4d}  {o.pairs:5d}  {o.found:5d}  {o.validated:9d}  {o.nondegenerate:14d}  {o.max_abs_gamma:.4f}")
    print(f"mean validated/found {mean_ratio(outcomes):.4f}  ({time.perf_counter() - t0:.1f}s)")


if __name__ == "__main__":
    main()
