"""The real algebraic Hopf system and its numerical solution.

Unknown ``y = (x, gamma, lambda_i, v_r, v_i)`` in R^{3n+2}; residual

    F(y) = (phi.v_r, phi.v_i - 1, f(x, gamma),
            D_x f v_r + lambda_i v_i, D_x f v_i - lambda_i v_r).

``phi`` is chosen once (at the initial guess) and never updated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .interval import IntervalArray, as_interval, block, concatenate, matmul
from .models import VectorField, free_direction, xdir


class NewtonError(ArithmeticError):
    """Newton's method failed; ``residual`` is the last residual norm."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class EigenSelectionError(ValueError):
    pass


class CrossingError(ValueError):
    pass


@dataclass
class HopfCandidate:
    x: np.ndarray
    gamma: float
    lambda_i: float
    v_r: np.ndarray
    v_i: np.ndarray
    phi: np.ndarray
    iterations: int = 0
    residual: float = float("nan")

    @property
    def n(self) -> int:
        return len(self.x)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.x, [self.gamma, self.lambda_i], self.v_r, self.v_i])

    @classmethod
    def from_vector(cls, y, phi, **kw) -> "HopfCandidate":
        y = np.asarray(y, dtype=float)
        n = (len(y) - 2) // 3
        return cls(
            x=y[:n].copy(),
            gamma=float(y[n]),
            lambda_i=float(y[n + 1]),
            v_r=y[n + 2 : 2 * n + 2].copy(),
            v_i=y[2 * n + 2 :].copy(),
            phi=np.asarray(phi, dtype=float),
            **kw,
        )


def split(y, n):
    """(x, gamma, lambda_i, v_r, v_i) views of a float or interval y."""
    return y[:n], y[n], y[n + 1], y[n + 2 : 2 * n + 2], y[2 * n + 2 :]


def _dot(phi, v):
    if isinstance(v, IntervalArray):
        return matmul(phi[None, :], v)[0]
    return float(phi @ v)


def hopf_map(vf: VectorField, phi, y):
    """F(y) as a float array, or as an enclosure when ``y`` is an interval vector."""
    n = vf.n
    x, g, lam, vr, vi = split(y, n)
    jet = vf.jet(x, g, [xdir(vr), xdir(vi)])
    f, Jvr, Jvi = jet[0][:, 0], jet[1][:, 0], jet[2][:, 0]
    parts = [
        _dot(phi, vr),
        _dot(phi, vi) - 1.0,
        f,
        Jvr + lam * vi,
        Jvi - lam * vr,
    ]
    if isinstance(y, IntervalArray):
        return concatenate([as_interval(p).reshape(-1) for p in parts])
    return np.concatenate([np.atleast_1d(p) for p in parts])


def hopf_jacobian(vf: VectorField, phi, y):
    """Analytic DF(y); an interval matrix when ``y`` is an interval vector."""
    n = vf.n
    x, g, lam, vr, vi = split(y, n)
    jet = vf.jet(x, g, [xdir(vr), xdir(vi), free_direction(n)])
    Jxi = jet[4]  # D f[.]        n x (n+1)
    Hr = jet[5]  # D^2 f[v_r, .]
    Hi = jet[6]  # D^2 f[v_i, .]
    J = Jxi[:, :n]
    eye = np.eye(n)
    zr = np.zeros((1, n))
    zc = np.zeros((n, 1))
    zn = np.zeros((n, n))
    phi_row = np.asarray(phi, dtype=float)[None, :]
    if isinstance(y, IntervalArray):
        lam_eye = lam * IntervalArray.point(eye)
        return block(
            [
                [np.zeros((1, n + 2)), phi_row, zr],
                [np.zeros((1, n + 2)), zr, phi_row],
                [Jxi, zc, zn, zn],
                [Hr, vi.reshape(-1, 1), J, lam_eye],
                [Hi, (-vr).reshape(-1, 1), -lam_eye, J],
            ]
        )
    return np.block(
        [
            [np.zeros((1, n + 2)), phi_row, zr],
            [np.zeros((1, n + 2)), zr, phi_row],
            [Jxi, zc, zn, zn],
            [Hr, vi[:, None], J, lam * eye],
            [Hi, -vr[:, None], -lam * eye, J],
        ]
    )


def assemble_F(vf: VectorField, cand: HopfCandidate):
    return hopf_map(vf, cand.phi, cand.to_vector())


def assemble_DF(vf: VectorField, cand: HopfCandidate):
    return hopf_jacobian(vf, cand.phi, cand.to_vector())


# ---------------------------------------------------------------------------
# starting points
# ---------------------------------------------------------------------------


def equilibrium(vf: VectorField, gamma: float, x0=None, tol=1e-13, max_iter=50) -> np.ndarray:
    """Zero of f(., gamma) by Newton from ``x0`` (default: the origin)."""
    x = np.zeros(vf.n) if x0 is None else np.asarray(x0, dtype=float).copy()
    for _ in range(max_iter):
        fx = vf.f(x, gamma)
        if np.linalg.norm(fx) <= tol:
            return x
        x = x - np.linalg.solve(vf.jacobian(x, gamma), fx)
    if np.linalg.norm(vf.f(x, gamma)) <= tol:
        return x
    raise NewtonError("equilibrium solve did not converge", float(np.linalg.norm(vf.f(x, gamma))))


def complex_pairs(J: np.ndarray):
    """Eigenvalues with positive imaginary part and their eigenvectors, largest Im first."""
    w, V = np.linalg.eig(J)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    keep = np.flatnonzero(w.imag > 1e-10 * scale)
    order = keep[np.argsort(-w.imag[keep], kind="stable")]
    return w[order], V[:, order]


def balanced_eigenvector(v: np.ndarray) -> np.ndarray:
    """Rotate the complex phase so that Re v is orthogonal to Im v and |Im v| >= |Re v|."""
    s = np.sum(v * v)
    if abs(s) > 1e-14 * np.vdot(v, v).real:
        theta = 0.5 * (np.pi - np.angle(s))
        v = v * np.exp(1j * theta)
    return v


def initial_guess(vf: VectorField, gamma0: float, pair_index: int | None = None, x0=None) -> HopfCandidate:
    """Starting point from the eigendecomposition of D_x f at an equilibrium."""
    x = equilibrium(vf, gamma0, x0)
    J = vf.jacobian(x, gamma0)
    lams, vecs = complex_pairs(J)
    if lams.size == 0:
        raise EigenSelectionError("no complex eigenvalue pair at gamma0")
    if pair_index is None:
        pair_index = int(np.argmin(np.abs(lams.real)))
    if not 0 <= pair_index < lams.size:
        raise EigenSelectionError(
            f"pair index {pair_index} out of range: only {lams.size} complex pairs (the rest are real)"
        )
    v = balanced_eigenvector(vecs[:, pair_index])
    vr, vi = v.real.copy(), v.imag.copy()
    phi = vi / float(vi @ vi)
    return HopfCandidate(x=x, gamma=float(gamma0), lambda_i=float(lams[pair_index].imag), v_r=vr, v_i=vi, phi=phi)


# ---------------------------------------------------------------------------
# Newton
# ---------------------------------------------------------------------------


def newton_solve(
    vf: VectorField, guess: HopfCandidate, newton_tol: float = 1e-12, max_iter: int = 50, history: list | None = None
) -> HopfCandidate:
    """Newton's method on F with phi frozen; ``history`` collects residual norms."""
    phi = guess.phi
    y = guess.to_vector()
    res = float(np.linalg.norm(hopf_map(vf, phi, y)))
    if history is not None:
        history.append(res)
    it = 0
    best = res
    stalled = 0
    while res > newton_tol:
        if it >= max_iter:
            raise NewtonError(f"no convergence in {max_iter} iterations", res, it)
        DF = hopf_jacobian(vf, phi, y)
        try:
            step = np.linalg.solve(DF, hopf_map(vf, phi, y))
        except np.linalg.LinAlgError as exc:
            raise NewtonError(f"singular Jacobian: {exc}", res, it) from exc
        if not np.all(np.isfinite(step)):
            raise NewtonError("non-finite Newton step", res, it)
        y = y - step
        it += 1
        res = float(np.linalg.norm(hopf_map(vf, phi, y)))
        if history is not None:
            history.append(res)
        if not np.isfinite(res):
            raise NewtonError("residual overflow", res, it)
        if res < 0.5 * best:
            best = res
            stalled = 0
        else:
            stalled += 1
            if stalled >= 5:
                raise NewtonError("Newton iteration stalled", res, it)
    return HopfCandidate.from_vector(y, phi, iterations=it, residual=res)


# ---------------------------------------------------------------------------
# crossing search
# ---------------------------------------------------------------------------


def _real_part(vf, j, gamma, x0):
    x = equilibrium(vf, gamma, x0)
    lams, _ = complex_pairs(vf.jacobian(x, gamma))
    if j >= lams.size:
        return float("nan")
    return float(lams[j].real)


def _sign_changes(vf, j, a, b, points, x0):
    """Brackets where Re changes sign: the ends first, then consecutive grid nodes."""
    fa = _real_part(vf, j, a, x0)
    fb = _real_part(vf, j, b, x0)
    if np.isfinite(fa) and np.isfinite(fb) and fa * fb <= 0:
        yield a, fa, b, fb
    if points < 3:
        return
    prev_g, prev_f = a, fa
    for g in np.linspace(a, b, points)[1:]:
        g = float(g)
        f = fb if g == b else _real_part(vf, j, g, x0)
        if np.isfinite(f) and np.isfinite(prev_f) and prev_f * f <= 0:
            yield prev_g, prev_f, g, f
        prev_g, prev_f = g, f


def _bisect(vf, j, a, fa, b, fb, tol, x0):
    """Shrink a sign-change bracket; ``None`` if it closes on a jump rather than a root."""
    if fa == 0:
        return a
    if fb == 0:
        return b
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = _real_part(vf, j, m, x0)
        if not np.isfinite(fm):
            return None
        if fm == 0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    # pairs are re-sorted by imaginary part at every parameter, so a swap of
    # labels shows up as a sign change across a gap that never closes
    if abs(fb - fa) > _JUMP_TOL:
        return None
    return 0.5 * (a + b)


_JUMP_TOL = 1e-3


def locate_crossing(
    vf: VectorField,
    pair_index: int,
    gamma_bracket=(-2.0, 2.0),
    tol: float = 1e-8,
    max_expand: int = 6,
    x0=None,
    scan_points: int = 64,
) -> float:
    """Parameter where Re of the ``pair_index``-th complex pair vanishes (bisection).

    Pairs are ordered by decreasing imaginary part.  Inside the bracket the
    ends are tried first, then a uniform grid of ``scan_points`` nodes, which
    catches an even number of crossings (typical of even-depth stacks).
    Brackets that close on a label swap are discarded.  The bracket is
    doubled up to ``max_expand`` times.
    """
    a, b = map(float, gamma_bracket)
    for _ in range(max_expand + 1):
        for lo, flo, hi, fhi in _sign_changes(vf, pair_index, a, b, scan_points, x0):
            g = _bisect(vf, pair_index, lo, flo, hi, fhi, tol, x0)
            if g is not None:
                return g
        mid, half = 0.5 * (a + b), (b - a)
        a, b = mid - half, mid + half
    raise CrossingError(f"no crossing of Re(lambda_{pair_index}) found up to [{a}, {b}]")


def pair_count(vf: VectorField, gamma: float, x0=None) -> int:
    x = equilibrium(vf, gamma, x0)
    return int(complex_pairs(vf.jacobian(x, gamma))[0].size)
