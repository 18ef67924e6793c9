"""Validated numerics for Hopf bifurcations in RNN vector fields."""

from .hopf import HopfCandidate, initial_guess, locate_crossing, newton_solve
from .interval import ComplexInterval, Interval, interval
from .linalg import spectral_gap_check, verified_eigenpair
from .lyapunov import LyapunovResult, Sign, first_lyapunov
from .models import (
    DiagonalElement,
    ExplicitAffine,
    GammaShift,
    OffDiagonalElement,
    PolynomialField,
    RNNField,
    WeightStructure,
    antisymmetric_2d,
    fixture_4d,
    make_field,
    random_structure,
)
from .pipeline import FamilyConfig, OrbitConfig, RunConfig, SolverConfig, load_config, run_search
from .validator import Certificate, Status, validate

__version__ = "0.1.0"

__all__ = [
    "HopfCandidate",
    "initial_guess",
    "locate_crossing",
    "newton_solve",
    "ComplexInterval",
    "Interval",
    "interval",
    "spectral_gap_check",
    "verified_eigenpair",
    "LyapunovResult",
    "Sign",
    "first_lyapunov",
    "DiagonalElement",
    "ExplicitAffine",
    "GammaShift",
    "OffDiagonalElement",
    "PolynomialField",
    "RNNField",
    "WeightStructure",
    "antisymmetric_2d",
    "fixture_4d",
    "make_field",
    "random_structure",
    "FamilyConfig",
    "OrbitConfig",
    "RunConfig",
    "SolverConfig",
    "load_config",
    "run_search",
    "Certificate",
    "Status",
    "validate",
]
