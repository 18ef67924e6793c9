"""One n = 400 GammaShift run, radii proofs only (spectral gap and l1 skipped).

Usage: python scripts/stretch_n400.py [--seed 0] [--out out/stretch_n400]
"""

import argparse
import json
import time
from pathlib import Path

from hopfcert.pipeline import FamilyConfig, RunConfig, SolverConfig, emit_diagram, run_search


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="out/stretch_n400")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    cfg = RunConfig(
        name="stretch_n400",
        family=FamilyConfig(n=400, seed=args.seed),
        solver=SolverConfig(spectral_gap=False, lyapunov=False),
        output_dir=args.out,
        workers=args.workers,
    )
    t0 = time.perf_counter()
    report = run_search(cfg)
    elapsed = time.perf_counter() - t0
    emit_diagram(report, cfg.output_dir)
    counts = report.counts()
    counts["ratio"] = counts["validated"] / max(counts["found"], 1)
    counts["seconds"] = round(elapsed, 1)
    Path(cfg.output_dir, "summary.json").write_text(json.dumps(counts, indent=2) + "\n")
    print(json.dumps(counts))


if __name__ == "__main__":
    main()
