"""Vector fields ``x' = f(x, gamma)`` and their derivative tensors.

All derivatives are taken with respect to the joint variable
``xi = (x, gamma)`` in R^{n+1}.  A *direction* is an array of shape
``(n+1, m)``: a plain direction has ``m == 1`` and the free slot used to
assemble Jacobian-like matrices is the identity (``m == n+1``).  At most one
direction per call may have ``m > 1``.

Every routine accepts floats (used by Newton) or :class:`IntervalArray`
inputs (used by the proofs); the interval path is selected as soon as one
argument is an interval.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Sequence, Union

import numpy as np

from .interval import IntervalArray, as_interval, tanh_enclosure

# ---------------------------------------------------------------------------
# weight structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GammaShift:
    """W - W^T + gamma*Id + P."""


@dataclass(frozen=True)
class DiagonalElement:
    """W - W^T + gamma0*Id + P + a*D with D[k, k] = 1."""

    k: int
    gamma0: float = 0.0


@dataclass(frozen=True)
class OffDiagonalElement:
    """W - W^T + gamma0*Id + P + a*F with F[i, j] = 1, i != j."""

    i: int
    j: int
    gamma0: float = 0.0


@dataclass(frozen=True)
class ExplicitAffine:
    """M0 + scale*gamma*Id with decimal coefficients kept exact as strings."""

    M0: tuple
    scale: str = "1"


Coupling = Union[GammaShift, DiagonalElement, OffDiagonalElement, ExplicitAffine]


@dataclass(frozen=True, eq=False)
class WeightStructure:
    """Recipe for the parameter-dependent weight matrix of one or more layers.

    ``layers`` is empty for a single-layer network; otherwise it lists one
    single-layer structure per layer (applied first to last) and the
    top-level W/P/coupling are ignored.
    """

    n: int
    W: np.ndarray
    P: np.ndarray
    coupling: Coupling = GammaShift()
    bias: np.ndarray | None = None
    sign: float = 1.0
    layers: tuple = ()
    activation: str = "tanh"

    def __post_init__(self):
        if self.sign not in (1.0, -1.0):
            raise ValueError("sign must be +1 or -1")
        c = self.coupling
        if isinstance(c, DiagonalElement) and not 0 <= c.k < self.n:
            raise IndexError(f"diagonal index {c.k} out of range for n={self.n}")
        if isinstance(c, OffDiagonalElement):
            if not (0 <= c.i < self.n and 0 <= c.j < self.n):
                raise IndexError(f"element ({c.i}, {c.j}) out of range for n={self.n}")
            if c.i == c.j:
                raise ValueError("off-diagonal coupling needs i != j")

    @property
    def stack(self) -> tuple:
        return self.layers if self.layers else (self,)


def _base_and_direction(s: WeightStructure):
    """(B, E) as interval matrices with W_hat(p) = B + p*E exactly."""
    n = s.n
    c = s.coupling
    if isinstance(c, ExplicitAffine):
        B = IntervalArray.from_decimal(c.M0)
        scale = IntervalArray.from_decimal(c.scale)
        E = IntervalArray.point(np.eye(n)) * scale
        return B, E
    W = as_interval(np.asarray(s.W, dtype=float))
    P = as_interval(np.asarray(s.P, dtype=float))
    B = (W - W.T) + P
    E = np.zeros((n, n))
    if isinstance(c, GammaShift):
        E = np.eye(n)
    elif isinstance(c, DiagonalElement):
        B = B + c.gamma0 * IntervalArray.point(np.eye(n))
        E[c.k, c.k] = 1.0
    elif isinstance(c, OffDiagonalElement):
        B = B + c.gamma0 * IntervalArray.point(np.eye(n))
        E[c.i, c.j] = 1.0
    else:
        raise TypeError(f"unknown coupling {c!r}")
    return B, IntervalArray.point(E)


def build_weight_matrix(s: WeightStructure, param):
    """W_hat(param); a list of matrices for multilayer structures.

    Float ``param`` gives a float matrix, interval ``param`` a rigorous
    interval matrix.
    """
    if s.layers:
        return [build_weight_matrix(layer, param) for layer in s.layers]
    B, E = _base_and_direction(s)
    if isinstance(param, IntervalArray):
        return B + param * E
    B_mid = B.mid
    E_mid = E.mid
    return B_mid + float(param) * E_mid


def random_structure(
    n: int,
    seed: int,
    perturbation_amplitude: float = 0.1,
    coupling: Coupling = GammaShift(),
    layers: int = 1,
) -> WeightStructure:
    """W ~ N(0, 1), P ~ N(0, amplitude^2) drawn from numpy's PCG64 stream.

    For ``layers > 1`` each layer draws its own (W, P) pair in order.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = np.random.Generator(np.random.PCG64(seed))

    def one():
        W = rng.standard_normal((n, n))
        P = perturbation_amplitude * rng.standard_normal((n, n))
        return WeightStructure(n=n, W=W, P=P, coupling=coupling)

    if layers == 1:
        return one()
    stack = tuple(one() for _ in range(layers))
    return WeightStructure(n=n, W=stack[0].W, P=stack[0].P, coupling=coupling, layers=stack)


FIXTURE_4D_M0 = (
    ("0.0929", "1.4109", "-0.6359", "-1.6482"),
    ("-1.3993", "-0.0672", "0.8243", "0.7872"),
    ("0.7769", "-0.7604", "0.0325", "1.8087"),
    ("1.4191", "-0.8182", "-1.7241", "0.0373"),
)


def fixture_4d() -> WeightStructure:
    """The explicit 4D benchmark: x' = -tanh((M0 + 0.1*gamma*Id) x)."""
    return WeightStructure(
        n=4,
        W=np.zeros((4, 4)),
        P=np.zeros((4, 4)),
        coupling=ExplicitAffine(M0=FIXTURE_4D_M0, scale="0.1"),
        sign=-1.0,
    )


def antisymmetric_2d(a: float) -> WeightStructure:
    """W - W^T = [[0, a], [-a, 0]], P = 0."""
    W = np.array([[0.0, a], [0.0, 0.0]])
    return WeightStructure(n=2, W=W, P=np.zeros((2, 2)))


# ---------------------------------------------------------------------------
# subset / partition bookkeeping for the jets
# ---------------------------------------------------------------------------


def _bits(mask: int):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def _set_partitions(mask: int):
    """All partitions of the bit set ``mask`` into nonempty blocks."""
    if mask == 0:
        yield []
        return
    low = mask & -mask
    rest = mask ^ low
    sub = rest
    while True:
        block = low | sub
        for p in _set_partitions(rest ^ sub):
            yield [block] + p
        if sub == 0:
            break
        sub = (sub - 1) & rest


_PARTITIONS = {m: list(_set_partitions(m)) for m in range(16)}


def _add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _mul(a, b):
    if a is None or b is None:
        return None
    return a * b


def free_direction(n: int) -> np.ndarray:
    return np.eye(n + 1)


def xdir(v) -> Union[np.ndarray, IntervalArray]:
    """Lift an x-direction (n,) to a xi-direction (n+1, 1) with zero gamma part."""
    if isinstance(v, IntervalArray):
        lo = np.concatenate([v.lo, [0.0]])[:, None]
        hi = np.concatenate([v.hi, [0.0]])[:, None]
        return IntervalArray(lo, hi)
    return np.concatenate([np.asarray(v, dtype=float), [0.0]])[:, None]


def xidir(v) -> Union[np.ndarray, IntervalArray]:
    """Column-shape a full xi-direction (n+1,)."""
    if isinstance(v, IntervalArray):
        return v.reshape(-1, 1)
    return np.asarray(v, dtype=float).reshape(-1, 1)


def _any_interval(*args) -> bool:
    return any(isinstance(a, IntervalArray) for a in args)


def _column(v):
    if isinstance(v, IntervalArray):
        return v.reshape(-1, 1)
    return np.asarray(v, dtype=float).reshape(-1, 1)


# ---------------------------------------------------------------------------
# vector fields
# ---------------------------------------------------------------------------


class VectorField:
    """Base class: subclasses implement :meth:`jet`."""

    n: int
    #: True when f(-x, gamma) = -f(x, gamma) for all x, gamma
    odd: bool = False

    def jet(self, x, gamma, dirs: Sequence) -> dict:
        """Mixed derivatives d^|S| f[dirs in S] for every subset S (bit mask).

        Entries are arrays of shape (n, m) or ``None`` for identically zero.
        Up to four directions may be passed; subsets of size four are not
        formed and come back as ``None``.
        """
        raise NotImplementedError

    def derivative(self, x, gamma, dirs: Sequence):
        if len(dirs) > 3:
            raise ValueError("derivatives above order 3 are not supported")
        full = (1 << len(dirs)) - 1
        out = self.jet(x, gamma, dirs)[full]
        if out is None:
            m = max([d.shape[1] for d in dirs] + [1])
            zero = np.zeros((self.n, m))
            return IntervalArray.point(zero) if _any_interval(x, gamma, *dirs) else zero
        return out

    # convenience surface ---------------------------------------------------
    def f(self, x, gamma):
        y = self.derivative(x, gamma, [])
        return y[:, 0]

    def jacobian_xi(self, x, gamma):
        return self.derivative(x, gamma, [free_direction(self.n)])

    def jacobian(self, x, gamma):
        return self.jacobian_xi(x, gamma)[:, : self.n]

    def dgamma(self, x, gamma):
        return self.jacobian_xi(x, gamma)[:, self.n]

    def d2f_apply(self, x, gamma, u, v):
        return self.derivative(x, gamma, [xdir(u), xdir(v)])[:, 0]

    def d3f_apply(self, x, gamma, u, v, w):
        return self.derivative(x, gamma, [xdir(u), xdir(v), xdir(w)])[:, 0]

    def d2_matrix(self, x, gamma, a):
        """D^2 f[a, .] as an n x (n+1) matrix (a is a xi-direction)."""
        return self.derivative(x, gamma, [a, free_direction(self.n)])

    def dgamma_blocks(self, x, gamma, v):
        """(d_gamma f, d_gamma (D_x f) v) at (x, gamma)."""
        e = np.zeros((self.n + 1, 1))
        e[self.n, 0] = 1.0
        jet = self.jet(x, gamma, [e, xdir(v)])
        zero = np.zeros(self.n)
        g1 = jet[1][:, 0] if jet[1] is not None else zero
        g2 = jet[3][:, 0] if jet[3] is not None else zero
        return g1, g2


class _Activation:
    def __init__(self, name: str):
        if name not in ("tanh", "identity"):
            raise ValueError(f"unknown activation {name!r}")
        self.name = name

    def __call__(self, z, order: int):
        if self.name == "identity":
            if order == 0:
                return z
            if order == 1:
                return IntervalArray.point(np.ones(z.shape)) if isinstance(z, IntervalArray) else np.ones(z.shape)
            return None
        if isinstance(z, IntervalArray):
            return tanh_enclosure(z, order)
        t = np.tanh(z)
        if order == 0:
            return t
        s = 1.0 - t * t
        if order == 1:
            return s
        if order == 2:
            return -2.0 * t * s
        return -2.0 * s * (1.0 - 3.0 * t * t)


class RNNField(VectorField):
    """x' = sign * sigma(W_L(...sigma(W_1 x + b_1)...) + b_L), W_k = B_k + gamma*E_k."""

    def __init__(self, structure: WeightStructure):
        self.structure = structure
        self.n = structure.n
        self.sign = float(structure.sign)
        self.activation = _Activation(structure.activation)
        self._layers = []
        for layer in structure.stack:
            B, E = _base_and_direction(layer)
            b = None
            if layer.bias is not None and np.any(layer.bias):
                b = np.asarray(layer.bias, dtype=float)
            # E = s*Id is applied as a scalar product (no matmul widening)
            scalar = None
            if isinstance(layer.coupling, GammaShift):
                scalar = 1.0
            elif isinstance(layer.coupling, ExplicitAffine):
                scalar = IntervalArray.from_decimal(layer.coupling.scale)
            self._layers.append((B, E, B.mid, E.mid, scalar, b))
        # odd activation and no bias: f(-x) = -f(x)
        self.odd = all(layer[5] is None for layer in self._layers)

    def jet(self, x, gamma, dirs):
        n = self.n
        k = len(dirs)
        if k > 4:
            raise ValueError("at most four directions per jet")
        interval = _any_interval(x, gamma, *dirs)
        if interval:
            x = as_interval(x)
            gamma = as_interval(gamma)
            dirs = [as_interval(d) for d in dirs]
        else:
            x = np.asarray(x, dtype=float)
            gamma = float(gamma)
            dirs = [np.asarray(d, dtype=float) for d in dirs]
        nmask = 1 << k
        # only subsets up to order 3 are formed
        masks = [m for m in range(nmask) if bin(m).count("1") <= 3]
        u = [None] * nmask
        u[0] = _column(x)
        for i, d in enumerate(dirs):
            u[1 << i] = d[:n]
        dg = [d[n] for d in dirs]
        for B, E, B_mid, E_mid, scalar, b in self._layers:
            if interval:
                Wg = B + gamma * E
                Em = E
            else:
                Wg = B_mid + gamma * E_mid
                Em = E_mid
                if isinstance(scalar, IntervalArray):
                    scalar = float(scalar.mid)

            def apply_E(v):
                if scalar is None:
                    return Em @ v
                if isinstance(scalar, float) and scalar == 1.0:
                    return v
                return scalar * v

            z = [None] * nmask
            for mask in masks:
                acc = None if u[mask] is None else Wg @ u[mask]
                for i in _bits(mask):
                    rest = u[mask ^ (1 << i)]
                    if rest is not None:
                        acc = _add(acc, dg[i] * apply_E(rest))
                if mask == 0 and b is not None:
                    acc = acc + b[:, None]
                z[mask] = acc
            sig = [self.activation(z[0], order) for order in range(min(k, 3) + 1)]
            y = [None] * nmask
            for mask in masks:
                total = None
                for part in _PARTITIONS[mask]:
                    term = sig[len(part)]
                    for blk in part:
                        term = _mul(term, z[blk])
                    total = _add(total, term)
                y[mask] = total
            u = y
        if self.sign != 1.0:
            u = [None if t is None else -t for t in u]
        return dict(enumerate(u))


class PolynomialField(VectorField):
    """Componentwise polynomials in xi = (x_0, ..., x_{n-1}, gamma).

    ``terms[c]`` lists ``(coefficient, (var, var, ...))`` monomials of
    component ``c``; variable ``n`` is gamma.  Coefficients must be exactly
    representable floats.
    """

    def __init__(self, n: int, terms: Sequence[Sequence[tuple]]):
        self.n = n
        self.terms = [list(t) for t in terms]

    def jet(self, x, gamma, dirs):
        interval = _any_interval(x, gamma, *dirs)
        n = self.n
        if interval:
            xi = [as_interval(x)[i] for i in range(n)] + [as_interval(gamma)]
            dirs = [as_interval(d) for d in dirs]
        else:
            xv = np.asarray(x, dtype=float)
            xi = [xv[i] for i in range(n)] + [float(gamma)]
            dirs = [np.asarray(d, dtype=float) for d in dirs]
        k = len(dirs)
        out = {}
        for mask in range(1 << k):
            idx = list(_bits(mask))
            rows = []
            nonzero = False
            for comp in self.terms:
                row = None
                for coef, factors in comp:
                    if len(idx) > len(factors):
                        continue
                    for slots in permutations(range(len(factors)), len(idx)):
                        term = coef
                        for d_i, pos in zip(idx, slots):
                            term = term * dirs[d_i][factors[pos]]
                        for pos in range(len(factors)):
                            if pos not in slots:
                                term = term * xi[factors[pos]]
                        row = _add(row, term)
                rows.append(row)
                nonzero = nonzero or row is not None
            if not nonzero:
                out[mask] = None
                continue
            m = max([dirs[i].shape[1] for i in idx] + [1])
            out[mask] = _stack_rows(rows, m, interval)
        return out


def _stack_rows(rows, m, interval):
    if interval:
        lo = np.zeros((len(rows), m))
        hi = np.zeros((len(rows), m))
        for r, row in enumerate(rows):
            if row is None:
                continue
            row = as_interval(row)
            lo[r] = np.broadcast_to(row.lo, (m,))
            hi[r] = np.broadcast_to(row.hi, (m,))
        return IntervalArray(lo, hi)
    out = np.zeros((len(rows), m))
    for r, row in enumerate(rows):
        if row is not None:
            out[r] = np.broadcast_to(np.asarray(row, dtype=float), (m,))
    return out


def make_field(structure: WeightStructure) -> RNNField:
    return RNNField(structure)


def f_eval(vf: VectorField, x, param):
    return vf.f(x, param)


def jacobian(vf: VectorField, x, param):
    return vf.jacobian(x, param)


def d2f_apply(vf: VectorField, x, param, u, v):
    return vf.d2f_apply(x, param, u, v)


def d3f_apply(vf: VectorField, x, param, u, v, w):
    return vf.d3f_apply(x, param, u, v, w)


def dgamma_blocks(vf: VectorField, x, param, v):
    return vf.dgamma_blocks(x, param, v)
