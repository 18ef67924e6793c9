"""Verified eigenpairs, the spectral-gap check and verified linear solves.

An eigenpair (v, lam) of a (possibly interval) matrix M is proven by running
the radii-polynomial test on the bordered system

    G(v, lam) = (M v - lam v, psi^* v - 1),   psi = v0 / |v0|^2,

written in real coordinates u = (Re v, Im v, Re lam, Im lam).  G is
quadratic, so Z2 needs no a-priori radius.  Because M enters Y and Z1 as an
interval matrix the resulting ball is valid for every point matrix in M.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interval import (
    ComplexIntervalArray,
    IntervalArray,
    as_complex_interval,
    as_interval,
    block,
    euclid_norm_upper,
    matmul,
    opnorm_upper,
)
from .validator import SingularMatrixError, Status, approx_inverse, certify_radius, defect_bound


@dataclass
class EigenEnclosure:
    lam: ComplexIntervalArray | None
    v: ComplexIntervalArray | None
    radius: float | None
    conclusive: bool
    simple: bool = False
    approx_lambda: complex = 0j
    reason: str = ""

    def on_axis(self) -> bool:
        return bool(self.lam.re.contains_zero())


@dataclass
class SpectrumVerdict:
    enclosures: list
    imaginary_axis_pairs: int
    passed: bool
    reason: str = ""


def _real_bordered(M: IntervalArray, lam0: complex, v0: np.ndarray, psi: np.ndarray):
    """(G(u0), DG(u0)) enclosures in real coordinates at the approximate pair."""
    n = M.shape[0]
    p, q = v0.real, v0.imag
    a, b = lam0.real, lam0.imag
    pr, pi = psi.real, psi.imag
    Mp = matmul(M, p)
    Mq = matmul(M, q)
    P, Q = IntervalArray.point(p), IntervalArray.point(q)
    A_, B_ = IntervalArray.point(a), IntervalArray.point(b)
    g1 = Mp - A_ * P + B_ * Q
    g2 = Mq - A_ * Q - B_ * P
    g3 = matmul(pr[None, :], p) + matmul(pi[None, :], q) - 1.0
    g4 = matmul(pr[None, :], q) - matmul(pi[None, :], p)
    G = IntervalArray(
        np.concatenate([g1.lo, g2.lo, g3.lo, g4.lo]), np.concatenate([g1.hi, g2.hi, g3.hi, g4.hi])
    )
    eye = np.eye(n)
    shifted = M - IntervalArray.point(a * eye)
    DG = block(
        [
            [shifted, b * eye, -p[:, None], q[:, None]],
            [-b * eye, shifted, -q[:, None], -p[:, None]],
            [pr[None, :], pi[None, :], np.zeros((1, 2))],
            [-pi[None, :], pr[None, :], np.zeros((1, 2))],
        ]
    )
    return G, DG


def _bordered_second_derivative(n: int) -> IntervalArray:
    diag = IntervalArray(-np.eye(n), np.eye(n))
    col = IntervalArray.symmetric((n, 1))
    return block(
        [
            [diag, diag, col, col],
            [diag, diag, col, col],
            [np.zeros((2, 2 * n + 2))],
        ]
    )


def verified_eigenpair(M, approx_lambda: complex, approx_v: np.ndarray) -> EigenEnclosure:
    """Enclose the eigenpair of every matrix in ``M`` near (approx_lambda, approx_v)."""
    M = as_interval(M)
    n = M.shape[0]
    v0 = np.asarray(approx_v, dtype=complex)
    lam0 = complex(approx_lambda)
    psi = v0 / np.vdot(v0, v0).real
    G, DG = _real_bordered(M, lam0, v0, psi)
    try:
        A = approx_inverse(DG.mid)
    except SingularMatrixError as exc:
        return EigenEnclosure(None, None, None, False, approx_lambda=lam0, reason=str(exc))
    Y = euclid_norm_upper(matmul(A, G))
    Z1 = defect_bound(A, DG)
    Z2 = opnorm_of(A, _bordered_second_derivative(n))
    status, _rm, _rp, r = certify_radius(Y, Z1, Z2)
    if status is not Status.VALIDATED:
        return EigenEnclosure(None, None, None, False, approx_lambda=lam0, reason=status.value)
    lam = ComplexIntervalArray(IntervalArray.from_midrad(lam0.real, r), IntervalArray.from_midrad(lam0.imag, r))
    v = ComplexIntervalArray(
        IntervalArray.from_midrad(v0.real, np.full(n, r)), IntervalArray.from_midrad(v0.imag, np.full(n, r))
    )
    return EigenEnclosure(lam, v, r, True, approx_lambda=lam0)


def opnorm_of(A: np.ndarray, K: IntervalArray) -> float:
    return opnorm_upper(matmul(A, K))


def verified_spectrum(M) -> list:
    """Verified enclosures of all n eigenpairs of M, with the ``simple`` flag set."""
    M = as_interval(M)
    w, V = np.linalg.eig(M.mid)
    encl = [verified_eigenpair(M, w[k], V[:, k]) for k in range(len(w))]
    for i, e in enumerate(encl):
        if not e.conclusive:
            continue
        e.simple = all(
            o.conclusive and not bool(e.lam.intersects(o.lam)) for j, o in enumerate(encl) if j != i
        )
    return encl


def spectral_gap_check(M, validated_pair: EigenEnclosure | None = None) -> SpectrumVerdict:
    """Prove that exactly one conjugate pair of M touches the imaginary axis."""
    encl = verified_spectrum(M)
    on_axis = [e for e in encl if e.conclusive and e.on_axis()]
    count = len(on_axis)
    if not all(e.conclusive for e in encl):
        return SpectrumVerdict(encl, count, False, "inconclusive eigenpair enclosure")
    if not all(e.simple for e in encl):
        return SpectrumVerdict(encl, count, False, "overlapping eigenvalue enclosures")
    if count != 2:
        return SpectrumVerdict(encl, count, False, f"{count} eigenvalues may lie on the imaginary axis")
    a, b = on_axis
    if not (bool(a.lam.re.intersects(b.lam.re)) and bool(a.lam.im.intersects(-b.lam.im))):
        return SpectrumVerdict(encl, count, False, "axis eigenvalues are not a conjugate pair")
    if validated_pair is not None and validated_pair.conclusive:
        if not any(bool(validated_pair.lam.intersects(e.lam)) for e in on_axis):
            return SpectrumVerdict(encl, count, False, "validated pair is not the axis pair")
    return SpectrumVerdict(encl, count, True)


def enclose_solve(M, rhs):
    """Enclosure of the solutions of M z = b for every M in ``M`` and b in ``rhs``.

    Works for real or complex interval data (complex data is realified).
    Returns None when the proof fails.
    """
    Mc = as_complex_interval(M)
    bc = as_complex_interval(rhs)
    n = Mc.shape[0]
    R = block([[Mc.re, -Mc.im], [Mc.im, Mc.re]])
    rb = IntervalArray(np.concatenate([bc.re.lo, bc.im.lo]), np.concatenate([bc.re.hi, bc.im.hi]))
    try:
        A = approx_inverse(R.mid)
    except SingularMatrixError:
        return None
    z0 = A @ rb.mid
    residual = rb - matmul(R, z0)
    Y = euclid_norm_upper(matmul(A, residual))
    Z1 = defect_bound(A, R)
    status, _rm, _rp, r = certify_radius(Y, Z1, 0.0)
    if status is not Status.VALIDATED:
        return None
    z = IntervalArray.from_midrad(z0, np.full(2 * n, r))
    return ComplexIntervalArray(z[:n], z[n:])
