"""Computer-assisted existence proofs for zeros of the Hopf map.

With ``A`` a floating-point inverse of DF(y_hat) and T(y) = y - A F(y):

* ``Y  >= |A F(y_hat)|``
* ``Z1 >= |Id - A DF(y_hat)|``
* ``Z2 >= |A D^2F(y_hat +- R)[c, .]|`` over all c in the box [-1, 1]^N

If p(r) = Y + (Z1 - 1) r + Z2 r^2 is negative at some 0 < r <= R then F has
exactly one zero in the closed Euclidean ball of radius r about y_hat.
All norms are Euclidean; the matrix norms are bounded by
:func:`~hopfcert.interval.opnorm_upper`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .hopf import HopfCandidate, hopf_jacobian, hopf_map, split
from .interval import (
    IntervalArray,
    block,
    euclid_norm_upper,
    matmul,
    opnorm_upper,
    sqrt_enclosure,
)
from .models import VectorField, free_direction, xdir

_EPS = np.finfo(float).eps


class Status(str, enum.Enum):
    VALIDATED = "Validated"
    RADII_FAILED = "RadiiFailed"
    RCAP_EXCEEDED = "RCapExceeded"
    SINGULAR_A = "SingularA"


class SingularMatrixError(np.linalg.LinAlgError):
    pass


@dataclass
class RadiiBounds:
    Y: float
    Z1: float
    Z2: float
    R_cap: float
    r_minus: IntervalArray | None = None
    r_plus: IntervalArray | None = None
    r_star: float | None = None


@dataclass
class Certificate:
    candidate: HopfCandidate
    bounds: RadiiBounds | None
    status: Status
    uniqueness_radius: float | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def validated(self) -> bool:
        return self.status is Status.VALIDATED


@dataclass(frozen=True)
class ValidationSettings:
    R_cap: float = 1e-4
    R_max: float = 1e-1
    escalation: float = 10.0


def approx_inverse(DF: np.ndarray) -> np.ndarray:
    """Floating-point inverse; raises SingularMatrixError above condition 1/eps."""
    DF = np.asarray(DF, dtype=float)
    if not np.all(np.isfinite(DF)):
        raise SingularMatrixError("non-finite matrix")
    try:
        cond = np.linalg.cond(DF)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    if not np.isfinite(cond) or cond > 1.0 / _EPS:
        raise SingularMatrixError(f"condition number {cond:.3g} exceeds 1/eps")
    return np.linalg.inv(DF)


# ---------------------------------------------------------------------------
# the three bounds
# ---------------------------------------------------------------------------


def bound_Y(vf: VectorField, y: HopfCandidate, A: np.ndarray) -> float:
    F = hopf_map(vf, y.phi, IntervalArray.point(y.to_vector()))
    return euclid_norm_upper(matmul(A, F))


def defect_bound(A: np.ndarray, M) -> float:
    """Upper bound of |Id - A M| for every point matrix in M."""
    N = A.shape[0]
    return opnorm_upper(IntervalArray.point(np.eye(N)) - matmul(A, M))


def bound_Z1(vf: VectorField, y: HopfCandidate, A: np.ndarray) -> float:
    DF = hopf_jacobian(vf, y.phi, IntervalArray.point(y.to_vector()))
    return defect_bound(A, DF)


def second_derivative_matrix(vf: VectorField, box: IntervalArray) -> IntervalArray:
    """Enclosure of D^2F(z)[c, .] for all z in ``box`` and all c in [-1, 1]^N."""
    n = vf.n
    x, g, _lam, vr, vi = split(box, n)
    unit_xi = IntervalArray.symmetric((n + 1, 1))
    unit_x = IntervalArray.symmetric((n,))
    free = free_direction(n)
    jet = vf.jet(x, g, [xdir(vr), xdir(vi), unit_xi, free])
    Hc = jet[12]  # D^2 f[c, .]
    Tr = jet[13]  # D^3 f[v_r, c, .]
    Ti = jet[14]  # D^3 f[v_i, c, .]
    Hcv = vf.d2_matrix(x, g, xdir(unit_x))  # D^2 f[(c_v, 0), .]
    Hc_x = Hc[:, :n]
    diag = IntervalArray(np.diag(np.full(n, -1.0)), np.diag(np.full(n, 1.0)))
    col = IntervalArray.symmetric((n, 1))
    zeros_rows = np.zeros((2, 3 * n + 2))
    return block(
        [
            [zeros_rows],
            [block([[Hc, np.zeros((n, 1 + 2 * n))]])],
            [block([[Tr + Hcv, col, Hc_x, diag]])],
            [block([[Ti + Hcv, col, diag, Hc_x]])],
        ]
    )


def inflate(y: np.ndarray, R: float) -> IntervalArray:
    return IntervalArray.from_midrad(y, np.full(y.shape, R))


def bound_Z2(vf: VectorField, y: HopfCandidate, A: np.ndarray, R_cap: float) -> float:
    if R_cap <= 0:
        raise ValueError("R_cap must be positive")
    K = second_derivative_matrix(vf, inflate(y.to_vector(), R_cap))
    return opnorm_upper(matmul(A, K))


# ---------------------------------------------------------------------------
# the radii polynomial
# ---------------------------------------------------------------------------


def radii_polynomial(Y: float, Z1: float, Z2: float, r) -> IntervalArray:
    """Enclosure of Y + (Z1 - 1) r + Z2 r^2."""
    r = IntervalArray.point(r) if not isinstance(r, IntervalArray) else r
    return IntervalArray.point(Y) + (IntervalArray.point(Z1) - 1.0) * r + IntervalArray.point(Z2) * r.sqr()


def radii_roots(Y: float, Z1: float, Z2: float):
    """Enclosures (r_minus, r_plus) of the roots of Z2 r^2 + (Z1 - 1) r + Y, or None.

    r_plus is +inf when Z2 == 0.
    """
    if not (Y >= 0 and Z1 >= 0 and Z2 >= 0):
        return None
    if not Z1 < 1.0:
        return None
    Yi = IntervalArray.point(Y)
    gap = 1.0 - IntervalArray.point(Z1)
    if Z2 == 0.0:
        return Yi / gap, IntervalArray(np.inf, np.inf)
    Z2i = IntervalArray.point(Z2)
    disc = gap.sqr() - 4.0 * Yi * Z2i
    if disc.lo <= 0:
        return None
    sq = sqrt_enclosure(disc)
    r_minus = (2.0 * Yi) / (gap + sq)
    r_plus = (gap + sq) / (2.0 * Z2i)
    return r_minus, r_plus


def certify_radius(Y: float, Z1: float, Z2: float, R_cap: float = math.inf):
    """(status, r_minus, r_plus, r_star) with p(r_star) < 0 proven when Validated."""
    roots = radii_roots(Y, Z1, Z2)
    if roots is None:
        return Status.RADII_FAILED, None, None, None
    r_minus, r_plus = roots
    # a floor keeps p(r_star) from underflowing when Y == 0
    r_star = max(math.nextafter(float(r_minus.hi), math.inf), 2.0**-900)
    if r_star > R_cap:
        return Status.RCAP_EXCEEDED, r_minus, r_plus, None
    if not r_star < float(r_plus.lo):
        return Status.RADII_FAILED, r_minus, r_plus, None
    if not radii_polynomial(Y, Z1, Z2, r_star).hi < 0:
        return Status.RADII_FAILED, r_minus, r_plus, None
    return Status.VALIDATED, r_minus, r_plus, r_star


def validate(vf: VectorField, y: HopfCandidate, settings: ValidationSettings | None = None, R_cap=None) -> Certificate:
    """Run the full proof; failures are reported through the certificate status."""
    settings = settings or ValidationSettings()
    R = settings.R_cap if R_cap is None else R_cap
    try:
        A = approx_inverse(hopf_jacobian(vf, y.phi, y.to_vector()))
    except SingularMatrixError as exc:
        return Certificate(y, None, Status.SINGULAR_A, metadata={"reason": str(exc)})
    Y = bound_Y(vf, y, A)
    Z1 = bound_Z1(vf, y, A)
    while True:
        Z2 = bound_Z2(vf, y, A, R)
        status, r_minus, r_plus, r_star = certify_radius(Y, Z1, Z2, R)
        bounds = RadiiBounds(Y=Y, Z1=Z1, Z2=Z2, R_cap=R, r_minus=r_minus, r_plus=r_plus, r_star=r_star)
        if status is Status.RCAP_EXCEEDED and R * settings.escalation <= settings.R_max * (1 + 1e-12):
            R *= settings.escalation
            continue
        return Certificate(y, bounds, status, uniqueness_radius=r_star)


def hopf_box(cert: Certificate):
    """(x box, gamma box) covering every point the certificate admits."""
    if not cert.validated:
        raise ValueError("certificate is not validated")
    n = cert.candidate.n
    r = cert.uniqueness_radius
    return IntervalArray.from_midrad(cert.candidate.x, np.full(n, r)), IntervalArray.from_midrad(cert.candidate.gamma, r)


def recheck_midpoint(bounds: RadiiBounds) -> bool:
    """p((r_minus + r_plus) / 2) < 0, rigorously."""
    if bounds.r_minus is None or bounds.r_plus is None or not np.isfinite(bounds.r_plus.lo):
        return False
    r = 0.5 * (float(bounds.r_minus.hi) + float(bounds.r_plus.lo))
    return bool(radii_polynomial(bounds.Y, bounds.Z1, bounds.Z2, r).hi < 0)


def origin_pinned(vf: VectorField, cert: Certificate) -> bool:
    """True when the certified zero provably has x = 0.

    For an odd field, x -> -x maps zeros of the Hopf map to zeros and maps a
    ball centred at x = 0 onto itself; uniqueness then forces x = 0.
    """
    return bool(getattr(vf, "odd", False) and cert.validated and not np.any(cert.candidate.x))


def certified_box(vf: VectorField, cert: Certificate):
    """Like :func:`hopf_box`, with the x box collapsed to 0 when :func:`origin_pinned`."""
    x, g = hopf_box(cert)
    if origin_pinned(vf, cert):
        x = IntervalArray.zeros((cert.candidate.n,))
    return x, g
