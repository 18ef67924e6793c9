"""Rigorous first Lyapunov coefficient at a validated Hopf point.

With J q = i*omega*q, J^T p = -i*omega*p, <q, q> = 1, <q, p> = 1 and
<x, y> = conj(x)^T y,

    l1 = Re( <p, C(q,q,qbar)> - 2 <p, B(q, J^{-1} B(q,qbar))>
             + <p, B(qbar, (2 i omega - J)^{-1} B(q,q))> ) / (2 omega),

B and C being the second and third x-derivatives of f.  For n = 2 this is
identical to Re(i g20 g11 + omega g21) / (2 omega^2); in every shipped
family B vanishes at the Hopf point and only the cubic term survives.
Everything is evaluated in interval arithmetic over the certified box.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import product

import numpy as np

from .interval import ComplexIntervalArray, IntervalArray, as_complex_interval, as_interval, inner, sqrt_enclosure
from .linalg import EigenEnclosure, enclose_solve, verified_eigenpair
from .models import VectorField, xdir


class Sign(str, enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class LyapunovResult:
    l1: IntervalArray | None
    sign: Sign
    normalization_residuals: tuple = (None, None)
    quadratic: IntervalArray | None = None
    cubic: IntervalArray | None = None
    reason: str = ""


def sign_of(l1: IntervalArray) -> Sign:
    if l1.lo > 0:
        return Sign.POSITIVE
    if l1.hi < 0:
        return Sign.NEGATIVE
    return Sign.INCONCLUSIVE


def adjoint_eigvec(M, lam: ComplexIntervalArray) -> EigenEnclosure:
    """Verified eigenvector of M^T for the eigenvalue conj(lam)."""
    M = as_interval(M)
    target = complex(lam.mid).conjugate()
    w, V = np.linalg.eig(M.mid.T)
    k = int(np.argmin(np.abs(w - target)))
    return verified_eigenpair(M.T, w[k], V[:, k])


def normalize_pair(v: ComplexIntervalArray, w: ComplexIntervalArray):
    """Rescale so that <v, v> = 1 and <v, w> = 1; None if <v, w> may vanish."""
    norm2 = inner(v, v).re
    if norm2.lo <= 0:
        return None
    vn = v * ComplexIntervalArray(sqrt_enclosure(norm2).reciprocal())
    s = inner(vn, w)
    if bool(s.re.contains_zero()) and bool(s.im.contains_zero()):
        return None
    wn = w / s
    return vn, wn


def normalization_residuals(v, w):
    return inner(v, v) - 1.0, inner(v, w) - 1.0


class _Derivatives:
    """Real derivatives d^k f[u_1, ..., u_k] at one point, memoised.

    Derivatives are symmetric and multilinear, so a value is keyed on the
    multiset of directions, and a direction equal to minus a known one is
    reused with a sign flip (interval negation is exact).
    """

    def __init__(self, vf: VectorField, x, gamma):
        self.vf, self.x, self.gamma = vf, x, gamma
        self.dirs = []
        self.index = {}
        self.values = {}

    @staticmethod
    def _key(d: IntervalArray) -> bytes:
        # adding 0.0 maps -0.0 to +0.0
        return (d.lo + 0.0).tobytes() + (d.hi + 0.0).tobytes()

    def _lookup(self, d: IntervalArray):
        key = self._key(d)
        if key in self.index:
            return self.index[key], False
        nkey = self._key(-d)
        if nkey in self.index:
            return self.index[nkey], True
        self.dirs.append(d)
        self.index[key] = len(self.dirs) - 1
        return self.index[key], False

    def __call__(self, dirs):
        found = [self._lookup(as_interval(d)) for d in dirs]
        key = tuple(sorted(i for i, _neg in found))
        if key not in self.values:
            self.values[key] = self.vf.derivative(self.x, self.gamma, [xdir(self.dirs[i]) for i in key])[:, 0]
        value = self.values[key]
        return -value if sum(neg for _i, neg in found) % 2 else value


def _complex_multilinear(derivs: _Derivatives, cdirs) -> ComplexIntervalArray:
    """d^k f[cdirs] for complex x-directions, by multilinearity."""
    re_acc = None
    im_acc = None
    for choice in product((0, 1), repeat=len(cdirs)):
        term = derivs([d.im if c else d.re for d, c in zip(cdirs, choice)])
        power = sum(choice) % 4  # i**power
        if power in (2, 3):
            term = -term
        if power in (0, 2):
            re_acc = term if re_acc is None else re_acc + term
        else:
            im_acc = term if im_acc is None else im_acc + term
    zero = IntervalArray.zeros((derivs.vf.n,))
    return ComplexIntervalArray(as_interval(zero if re_acc is None else re_acc), as_interval(zero if im_acc is None else im_acc))


def _is_zero(z: ComplexIntervalArray) -> bool:
    return bool(np.all(z.re.lo == 0) and np.all(z.re.hi == 0) and np.all(z.im.lo == 0) and np.all(z.im.hi == 0))


def lyapunov_terms(vf: VectorField, x, gamma, v, w, omega, J=None):
    """(quadratic, cubic) contributions to l1 as real intervals, or None on failure."""
    x = as_interval(x)
    gamma = as_interval(gamma)
    omega = as_interval(omega)
    v = as_complex_interval(v)
    w = as_complex_interval(w)
    vb = v.conj()
    two_omega = 2.0 * omega
    derivs = _Derivatives(vf, x, gamma)
    C = _complex_multilinear(derivs, [v, v, vb])
    cubic = inner(w, C).re / two_omega
    B11 = _complex_multilinear(derivs, [v, vb])
    B20 = _complex_multilinear(derivs, [v, v])
    if _is_zero(B11) and _is_zero(B20):
        return IntervalArray.zeros(()), cubic
    if J is None:
        J = vf.jacobian(x, gamma)
    J = as_interval(J)
    h11 = enclose_solve(J, B11)
    n = vf.n
    shifted = ComplexIntervalArray(-J, IntervalArray.point(np.eye(n)) * two_omega)
    h20 = enclose_solve(shifted, B20)
    if h11 is None or h20 is None:
        return None
    t1 = inner(w, _complex_multilinear(derivs, [v, h11]))
    t2 = inner(w, _complex_multilinear(derivs, [vb, h20]))
    quadratic = (t2.re - 2.0 * t1.re) / two_omega
    return quadratic, cubic


def first_lyapunov(vf: VectorField, hopf_box, v, w, lam, J=None) -> LyapunovResult:
    """l1 over the certified box from verified (v, w, lam) enclosures.

    ``hopf_box`` is ``(x_box, gamma_box)``; ``lam`` encloses the eigenvalue
    i*omega with omega > 0.
    """
    x, gamma = hopf_box
    lam = as_complex_interval(lam)
    omega = lam.im
    if omega.lo <= 0:
        return LyapunovResult(None, Sign.INCONCLUSIVE, reason="eigenvalue imaginary part not positive")
    pair = normalize_pair(v, w)
    if pair is None:
        return LyapunovResult(None, Sign.INCONCLUSIVE, reason="<v, w> may vanish")
    vn, wn = pair
    terms = lyapunov_terms(vf, x, gamma, vn, wn, omega, J)
    if terms is None:
        return LyapunovResult(None, Sign.INCONCLUSIVE, normalization_residuals(vn, wn), reason="linear solve failed")
    quadratic, cubic = terms
    l1 = quadratic + cubic
    return LyapunovResult(l1, sign_of(l1), normalization_residuals(vn, wn), quadratic, cubic)


def lyapunov_float(vf: VectorField, x, gamma) -> float:
    """Non-rigorous l1 at a point (same formula, floating point)."""
    J = vf.jacobian(x, gamma)
    lams, V = np.linalg.eig(J)
    k = int(np.argmax(lams.imag - 1e3 * np.abs(lams.real)))
    omega = lams[k].imag
    q = V[:, k] / np.linalg.norm(V[:, k])
    wl, WV = np.linalg.eig(J.T)
    p = WV[:, int(np.argmin(np.abs(wl + 1j * omega)))]
    p = p / np.vdot(q, p)  # <q, p> = conj(q).p = 1

    def multi(dirs):
        out = 0j
        for choice in product((0, 1), repeat=len(dirs)):
            d = [xdir(z.imag if c else z.real) for z, c in zip(dirs, choice)]
            out = out + (1j ** sum(choice)) * vf.derivative(x, gamma, d)[:, 0]
        return out

    C = multi([q, q, q.conj()])
    B11 = multi([q, q.conj()])
    B20 = multi([q, q])
    h11 = np.linalg.solve(J, B11)
    h20 = np.linalg.solve(2j * omega * np.eye(len(q)) - J, B20)
    val = np.vdot(p, C) - 2 * np.vdot(p, multi([q, h11])) + np.vdot(p, multi([q.conj(), h20]))
    return float(val.real / (2 * omega))
