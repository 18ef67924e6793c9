"""Orbit data near the last Hopf point, on the predicted orbit and from far away.

Writes one CSV per (n, mode) into --out.  Integration is plain RK4 and not
rigorous.  Usage: python scripts/transient_orbits.py [--sizes 6 50]
"""

import argparse
from dataclasses import replace
from pathlib import Path

from hopfcert.models import make_field
from hopfcert.pipeline import (
    FamilyConfig,
    OrbitConfig,
    RunConfig,
    integrate_orbit,
    orbit_csv,
    orbit_initial_condition,
    run_search,
)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[6, 50])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="out/orbits")
    args = ap.parse_args()
    for n in args.sizes:
        cfg = RunConfig(family=FamilyConfig(n=n, seed=args.seed), orbit=OrbitConfig(horizon=300.0))
        report = run_search(cfg)
        vf = make_field(cfg.family.structure())
        for mode in ("near-orbit", "random-far"):
            start = orbit_initial_condition(vf, report, replace(cfg.orbit, mode=mode))
            if start is None:
                print(f"n={n}: no validated Hopf point")
                break
            gamma, x0 = start
            ts, xs = integrate_orbit(vf, gamma, x0, cfg.orbit.step, cfg.orbit.horizon, cfg.orbit.sample_every)
            path = Path(args.out) / f"orbit_n{n}_{mode}.csv"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(orbit_csv(ts, xs, cfg.orbit.coords))
            print(f"n={n} {mode}: gamma {gamma:.6f}, |x(T)| {float((xs[-1] ** 2).sum() ** 0.5):.3e} -> {path}")


if __name__ == "__main__":
    main()
