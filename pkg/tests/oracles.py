"""Independent reference computations used by the tests.

Nothing here calls into hopfcert's arithmetic: rational operations use
Fraction, transcendental ones use mpmath at 60 digits with closed forms
written in sinh/cosh, and eigenvalue crossings come from plain numpy.
"""

import math
from fractions import Fraction

import mpmath as mp
import numpy as np

mp.mp.dps = 60


def exact(op, a: float, b: float = None) -> Fraction:
    fa = Fraction(a)
    if op == "neg":
        return -fa
    fb = Fraction(b)
    if op == "add":
        return fa + fb
    if op == "sub":
        return fa - fb
    if op == "mul":
        return fa * fb
    if op == "div":
        return fa / fb
    raise ValueError(op)


def tanh_derivative(x: float, order: int):
    """d^order/dx^order tanh(x) from sinh/cosh, as an mpf."""
    x = mp.mpf(x)
    if order == 0:
        return mp.tanh(x)
    c = mp.cosh(x)
    s = mp.sinh(x)
    if order == 1:
        return 1 / c**2
    if order == 2:
        return -2 * s / c**3
    if order == 3:
        return (4 * s**2 - 2) / c**4
    raise ValueError(order)


def sqrt(x: float):
    return mp.sqrt(mp.mpf(x))


def inside(value, lo: float, hi: float) -> bool:
    """lo <= value <= hi for an exact Fraction or mpf value (bounds may be infinite)."""
    conv = Fraction if isinstance(value, Fraction) else mp.mpf
    above = lo == -math.inf or conv(lo) <= value
    below = hi == math.inf or value <= conv(hi)
    return above and below


def crossing_bisection(matrix_of_gamma, lo, hi, grid=2001, tol=1e-13):
    """All gamma in [lo, hi] where some complex eigenvalue pair has zero real part.

    Brute force: scan a grid for sign changes of each sorted real part,
    then bisect.  ``matrix_of_gamma`` returns the Jacobian at gamma.
    """

    def re_parts(g):
        w = np.linalg.eigvals(matrix_of_gamma(g))
        return np.sort(w[w.imag > 0].real)

    gs = np.linspace(lo, hi, grid)
    vals = [re_parts(g) for g in gs]
    roots = []
    for k in range(len(vals[0])):
        for a, b, fa, fb in zip(gs[:-1], gs[1:], [v[k] for v in vals[:-1]], [v[k] for v in vals[1:]]):
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


def normal_form_l1(sigma: float) -> float:
    """l1 of x' = g x - y + s x r^2, y' = x + g y + s y r^2 at g = 0, with |q| = 1.

    In z = <p, x> coordinates with q = (1, -i)/sqrt(2), |x|^2 = 2|z|^2, so
    z' = (g + i) z + 2 s |z|^2 z and l1 = Re(c1)/omega = 2 s.
    """
    return 2.0 * sigma


def l1_tanh_at_origin(M: np.ndarray, sign: float) -> float:
    """l1 of x' = sign*tanh(M x) at x = 0 in 60-digit arithmetic.

    Only the cubic term survives: D^3 f[a,b,c] = sign*tanh'''(0)*(Ma)(Mb)(Mc)
    with tanh'''(0) = -2.
    """
    n = M.shape[0]
    A = mp.matrix((sign * M).tolist())
    E, ER = mp.eig(A)
    k = max(range(n), key=lambda i: mp.im(E[i]) - 1000 * abs(mp.re(E[i])))
    om = mp.im(E[k])
    q = ER[:, k]
    q = q / mp.sqrt(sum(abs(z) ** 2 for z in q))
    EL, EW = mp.eig(A.T)
    kk = min(range(n), key=lambda i: abs(EL[i] + 1j * om))
    p = EW[:, kk]
    s = sum(mp.conj(q[i]) * p[i] for i in range(n))
    p = p / s
    Mq = mp.matrix(M.tolist()) * q
    C = [-2 * sign * Mq[i] * Mq[i] * mp.conj(Mq[i]) for i in range(n)]
    return float(mp.re(sum(mp.conj(p[i]) * C[i] for i in range(n))) / (2 * om))
