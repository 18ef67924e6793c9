"""Find seeds for the n = 6 diagonal, off-diagonal and three-layer families.

Prints the first seed meeting each target; the configs/ files pin the result.
Usage: python scripts/family_seed_search.py [--max-seed 50]
"""

import argparse

from hopfcert.pipeline import FamilyConfig, RunConfig, run_search

TARGETS = {
    # name: (family, predicate on the report)
    "diagonal_n6": (dict(coupling="diagonal", k=5), lambda r: r.found == 3 and r.validated == 3),
    "off_diagonal_n6": (dict(coupling="off_diagonal", i=3, j=2), lambda r: r.found >= 1),
    "multilayer_n6": (dict(layers=3), lambda r: r.validated >= 1),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-seed", type=int, default=50)
    args = ap.parse_args()
    for name, (kw, ok) in TARGETS.items():
        for seed in range(args.max_seed):
            rep = run_search(RunConfig(family=FamilyConfig(n=6, seed=seed, **kw)))
            if ok(rep):
                print(f"{name}: seed {seed}  {rep.counts()}")
                break
        else:
            print(f"{name}: no seed below {args.max_seed}")


if __name__ == "__main__":
    main()
