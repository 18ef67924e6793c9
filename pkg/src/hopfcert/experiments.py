"""Sweeps shared by the scripts and the acceptance suite."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hopf import complex_pairs
from .models import make_field, random_structure
from .pipeline import FamilyConfig, RunConfig, SolverConfig, run_search


def complex_pair_count(n: int, seed: int, amplitude: float = 0.1) -> int:
    """Number of non-real eigenvalue pairs of W - W^T + P (GammaShift family)."""
    vf = make_field(random_structure(n, seed, amplitude))
    return int(complex_pairs(vf.jacobian(np.zeros(n), 0.0))[0].size)


def complete_pair_seeds(n: int, count: int, amplitude: float = 0.1, start: int = 0) -> list:
    """The first ``count`` seeds >= ``start`` whose matrix has n // 2 complex pairs.

    A real eigenvalue pair cannot undergo a Hopf bifurcation, so seeds
    where the perturbation merged a pair onto the real axis are skipped.
    The filter looks only at the spectrum, never at validation outcomes.
    """
    seeds = []
    s = start
    while len(seeds) < count:
        if complex_pair_count(n, s, amplitude) == n // 2:
            seeds.append(s)
        s += 1
    return seeds


@dataclass
class SeedOutcome:
    seed: int
    pairs: int
    found: int
    validated: int
    nondegenerate: int
    max_abs_gamma: float


def robustness_sweep(n: int, seeds, amplitude: float = 0.1, solver: SolverConfig | None = None) -> list:
    out = []
    for seed in seeds:
        cfg = RunConfig(family=FamilyConfig(n=n, seed=seed, amplitude=amplitude), solver=solver or SolverConfig())
        rep = run_search(cfg)
        gammas = [abs(r.candidate.gamma) for r in rep.results if r.validated]
        out.append(
            SeedOutcome(
                seed=seed,
                pairs=rep.attempted,
                found=rep.found,
                validated=rep.validated,
                nondegenerate=rep.nondegenerate,
                max_abs_gamma=max(gammas) if gammas else float("nan"),
            )
        )
    return out


def mean_ratio(outcomes) -> float:
    return float(np.mean([o.validated / o.found for o in outcomes if o.found]))
