"""Search the explicit 4D benchmark and compare with a plain eigenvalue bisection.

Usage: python scripts/reproduce_4d.py [--out out/fixture4d]
"""

import argparse
import time

import numpy as np

from hopfcert.models import FIXTURE_4D_M0
from hopfcert.pipeline import FamilyConfig, RunConfig, emit_certificates, emit_diagram, run_search


def bisection_crossings(lo=-2.0, hi=2.0, grid=4001, tol=1e-13):
    """Zeros of the real parts of -(M0 + 0.1 g I), by grid scan and bisection."""
    M0 = np.array([[float(v) for v in row] for row in FIXTURE_4D_M0])

    def re_parts(g):
        w = np.linalg.eigvals(-(M0 + 0.1 * g * np.eye(4)))
        w = w[w.imag > 0]
        return np.sort(w.real)

    roots = []
    gs = np.linspace(lo, hi, grid)
    vals = np.array([re_parts(g) for g in gs])
    for k in range(vals.shape[1]):
        for a, b, fa, fb in zip(gs[:-1], gs[1:], vals[:-1, k], vals[1:, k]):
            if fa * fb < 0:
                while b - a > tol:
                    m = 0.5 * (a + b)
                    fm = re_parts(m)[k]
                    if (fm < 0) == (fa < 0):
                        a, fa = m, fm
                    else:
                        b = m
                roots.append(0.5 * (a + b))
    return sorted(roots)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out/fixture4d")
    args = ap.parse_args()
    t0 = time.perf_counter()
    report = run_search(RunConfig(name="fixture4d", family=FamilyConfig(kind="fixture4d"), output_dir=args.out))
    elapsed = time.perf_counter() - t0
    emit_certificates(report, args.out)
    emit_diagram(report, args.out)
    oracle = bisection_crossings()
    print(f"search finished in {elapsed:.2f}s; oracle crossings {oracle}")
    for r in report.results:
        d = min(abs(r.candidate.gamma - g) for g in oracle)
        ly = r.lyapunov
        print(
            f"pair {r.pair_index}: gamma {r.candidate.gamma:.15f} (oracle distance {d:.1e}) "
            f"lambda_i {r.candidate.lambda_i:.12f} status {r.status} gap {r.gap_passed} "
            f"l1 [{float(ly.l1.lo):.10e}, {float(ly.l1.hi):.10e}] {ly.sign.value}"
        )


if __name__ == "__main__":
    main()
