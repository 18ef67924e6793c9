"""High-precision cross-check of Hopf certificates (mpmath).

The vector field is re-evaluated from its :class:`WeightStructure` with
mpmath at ``dps`` decimal digits, independently of the jet engine and of the
interval library.  A simplified Newton iteration with the floating-point
inverse ``A`` converges linearly at rate ~Z1 to the true zero; the distance
from the float candidate is then compared with the certified radius.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .hopf import HopfCandidate, hopf_jacobian
from .models import DiagonalElement, ExplicitAffine, GammaShift, OffDiagonalElement, WeightStructure


def _mp_layers(structure: WeightStructure):
    out = []
    for s in structure.stack:
        n = s.n
        c = s.coupling
        if isinstance(c, ExplicitAffine):
            B = mp.matrix([[mp.mpf(v) for v in row] for row in c.M0])
            E = mp.mpf(c.scale) * mp.eye(n)
        else:
            W = mp.matrix(np.asarray(s.W, dtype=float).tolist())
            P = mp.matrix(np.asarray(s.P, dtype=float).tolist())
            B = W - W.T + P
            E = mp.zeros(n, n)
            if isinstance(c, GammaShift):
                E = mp.eye(n)
            elif isinstance(c, DiagonalElement):
                B += mp.mpf(c.gamma0) * mp.eye(n)
                E[c.k, c.k] = 1
            elif isinstance(c, OffDiagonalElement):
                B += mp.mpf(c.gamma0) * mp.eye(n)
                E[c.i, c.j] = 1
        b = None if s.bias is None else mp.matrix(np.asarray(s.bias, dtype=float).tolist())
        out.append((B, E, b))
    return out


class MPField:
    """f and D_x f . v of an RNN structure in mpmath arithmetic."""

    def __init__(self, structure: WeightStructure):
        self.n = structure.n
        self.sign = mp.mpf(structure.sign)
        self.identity = structure.activation == "identity"
        self.layers = _mp_layers(structure)

    def f_and_jv(self, x, gamma, vs):
        """(f(x), [D_x f v for v in vs]) as mp column matrices."""
        u = x
        du = list(vs)
        for B, E, b in self.layers:
            W = B + gamma * E
            z = W * u
            if b is not None:
                z += b
            dz = [W * d for d in du]
            if self.identity:
                u, du = z, dz
                continue
            t = [mp.tanh(zi) for zi in z]
            u = mp.matrix(t)
            du = [mp.matrix([(1 - t[i] ** 2) * d[i] for i in range(self.n)]) for d in dz]
        return self.sign * u, [self.sign * d for d in du]


def mp_hopf_map(mf: MPField, phi, y):
    n = mf.n
    x = mp.matrix(y[:n])
    gamma, lam = y[n], y[n + 1]
    vr = mp.matrix(y[n + 2 : 2 * n + 2])
    vi = mp.matrix(y[2 * n + 2 :])
    f, (jr, ji) = mf.f_and_jv(x, gamma, [vr, vi])
    out = [mp.fsum(phi[i] * vr[i] for i in range(n)), mp.fsum(phi[i] * vi[i] for i in range(n)) - 1]
    out += [f[i] for i in range(n)]
    out += [jr[i] + lam * vi[i] for i in range(n)]
    out += [ji[i] - lam * vr[i] for i in range(n)]
    return out


@dataclass
class Refinement:
    y: list  # mp values
    distance: float  # |y - y_hat|_2, rounded up to a float
    residual: float
    iterations: int


def refine_high_precision(vf, structure: WeightStructure, cand: HopfCandidate, dps: int = 50, max_iter: int = 60) -> Refinement:
    """Zero of the Hopf map near ``cand`` to ``dps`` digits."""
    with mp.workdps(dps):
        mf = MPField(structure)
        y0 = [mp.mpf(float(v)) for v in cand.to_vector()]
        phi = [mp.mpf(float(p)) for p in cand.phi]
        A = np.linalg.inv(hopf_jacobian(vf, cand.phi, cand.to_vector()))
        Amp = mp.matrix(A.tolist())
        y = list(y0)
        tol = mp.mpf(10) ** (-(dps - 8))
        res = mp.inf
        it = 0
        for it in range(1, max_iter + 1):
            F = mp.matrix(mp_hopf_map(mf, phi, y))
            res = mp.norm(F)
            step = Amp * F
            y = [y[i] - step[i] for i in range(len(y))]
            if mp.norm(step) < tol:
                break
        dist = mp.sqrt(mp.fsum((y[i] - y0[i]) ** 2 for i in range(len(y))))
        distance = float(dist)
        if mp.mpf(distance) < dist:  # round the conversion upwards
            distance = float(np.nextafter(distance, np.inf))
        return Refinement(y=y, distance=distance, residual=float(res), iterations=it)
