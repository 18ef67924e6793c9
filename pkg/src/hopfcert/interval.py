"""Vectorised outward-rounded interval arithmetic on top of numpy.

Every elementwise operation computes the round-to-nearest result and then
decides the rounding direction exactly with an error-free transformation
(TwoSum / Dekker TwoProduct).  The bound is moved to the next representable
float only when the result was inexact, so exact operations such as
``[1,2] * [3,4]`` return ``[3,8]`` without spurious widening.  No global
rounding mode is touched.

Matrix products use a midpoint-radius formulation with an a-priori bound on
the floating-point error of the dot products.

Complex quantities are stored as rectangular enclosures (``ComplexIntervalArray``).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

import numpy as np

_U = 2.0**-53  # unit roundoff
_ETA = 2.0**-1074  # smallest subnormal
_SPLITTER = 134217729.0  # 2**27 + 1
_SPLIT_MAX = 2.0**995
_TINY = 2.0**-960
TANH_ULPS = 4

ArrayLike = Union[float, np.ndarray]


class IntervalError(ArithmeticError):
    """Raised for operations that are undefined on the given enclosure."""


# ---------------------------------------------------------------------------
# error-free transformations and directed rounding
# ---------------------------------------------------------------------------

def _down(x):
    return np.nextafter(x, -np.inf)


def _up(x):
    return np.nextafter(x, np.inf)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _round_pair(s, err, unsafe=None):
    """Turn (nearest, exact error) into a tight directed-rounding pair."""
    with np.errstate(invalid="ignore"):
        bad = ~np.isfinite(err)
        if unsafe is not None:
            bad = bad | unsafe
        lo = np.where(bad | (err < 0), _down(s), s)
        hi = np.where(bad | (err > 0), _up(s), s)
    return lo, hi


def add_rd(a, b):
    s, e = _two_sum(a, b)
    return _round_pair(s, e)[0]


def add_ru(a, b):
    s, e = _two_sum(a, b)
    return _round_pair(s, e)[1]


def _mul_unsafe(a, b, p):
    big = (np.abs(a) > _SPLIT_MAX) | (np.abs(b) > _SPLIT_MAX)
    small = (np.abs(p) < _TINY) & (a != 0) & (b != 0)
    return big | small


def mul_pair(a, b):
    """Directed-rounding bounds of the exact product a*b (pointwise)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        p, e = _two_prod(a, b)
        return _round_pair(p, e, _mul_unsafe(a, b, p))


def div_pair(a, b):
    """Directed-rounding bounds of the exact quotient a/b, b != 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        q = a / b
        p, e = _two_prod(q, b)
        r = (a - p) - e  # exact residual a - q*b
        unsafe = _mul_unsafe(q, b, p) | (np.abs(a) < _TINY) | (np.abs(q) < _TINY)
        unsafe = unsafe & (a != 0)
        direction = np.sign(r) * np.sign(b)
        return _round_pair(q, direction, unsafe)


def sqrt_pair(a):
    a = np.asarray(a, dtype=float)
    with np.errstate(invalid="ignore"):
        s = np.sqrt(a)
        p, e = _two_prod(s, s)
        r = (a - p) - e
        unsafe = (np.abs(a) < _TINY) & (a != 0)
        lo, hi = _round_pair(s, r, unsafe)
    return np.maximum(lo, 0.0), hi


def _sum_up(x, axis=None):
    """Upper bound of the exact sum of nonnegative floats."""
    x = np.asarray(x, dtype=float)
    k = x.size if axis is None else x.shape[axis]
    s = np.sum(x, axis=axis)
    # float addition has no absolute error term; a zero sum is exact
    return np.where(s == 0, 0.0, _up(s * (1.0 + 2.0 * (k + 2) * _U)))


def float_enclosure(value) -> tuple[float, float]:
    """Tight float bounds of an exact rational or decimal string such as "0.0929"."""
    fr = Fraction(value)
    f = float(fr)
    if Fraction(f) == fr:
        return f, f
    if Fraction(f) < fr:
        return f, math.nextafter(f, math.inf)
    return math.nextafter(f, -math.inf), f


# ---------------------------------------------------------------------------
# real intervals
# ---------------------------------------------------------------------------

class IntervalArray:
    """An array of closed real intervals ``[lo, hi]`` (numpy broadcasting rules)."""

    __slots__ = ("lo", "hi")
    __array_ufunc__ = None  # make numpy defer to our reflected operators

    def __init__(self, lo, hi=None):
        lo = np.array(lo, dtype=float)
        hi = lo.copy() if hi is None else np.array(hi, dtype=float)
        lo, hi = np.broadcast_arrays(lo, hi)
        if np.any(lo > hi):
            raise IntervalError("lower bound exceeds upper bound")
        self.lo = np.array(lo)
        self.hi = np.array(hi)

    # construction ---------------------------------------------------------
    @classmethod
    def _raw(cls, lo, hi):
        obj = object.__new__(cls)
        obj.lo = lo
        obj.hi = hi
        return obj

    @classmethod
    def point(cls, x):
        x = np.array(x, dtype=float)
        return cls._raw(x, x.copy())

    @classmethod
    def from_midrad(cls, mid, rad):
        mid = np.asarray(mid, dtype=float)
        rad = np.asarray(rad, dtype=float)
        mid, rad = np.broadcast_arrays(mid, rad)
        return cls._raw(add_rd(mid, -rad), add_ru(mid, rad))

    @classmethod
    def zeros(cls, shape):
        return cls._raw(np.zeros(shape), np.zeros(shape))

    @classmethod
    def symmetric(cls, shape, r=1.0):
        """The box [-r, r] in every entry."""
        return cls._raw(np.full(shape, -float(r)), np.full(shape, float(r)))

    @classmethod
    def from_decimal(cls, values):
        """Enclose decimal strings (or nested lists of them) exactly."""
        arr = np.asarray(values, dtype=object)
        lo = np.empty(arr.shape)
        hi = np.empty(arr.shape)
        for idx, v in np.ndenumerate(arr):
            lo[idx], hi[idx] = float_enclosure(str(v))
        return cls._raw(lo, hi)

    # array protocol -------------------------------------------------------
    @property
    def shape(self):
        return self.lo.shape

    @property
    def ndim(self):
        return self.lo.ndim

    @property
    def size(self):
        return self.lo.size

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, idx):
        return IntervalArray._raw(self.lo[idx], self.hi[idx])

    def __setitem__(self, idx, value):
        value = as_interval(value)
        self.lo[idx] = value.lo
        self.hi[idx] = value.hi

    @property
    def T(self):
        return IntervalArray._raw(self.lo.T, self.hi.T)

    def reshape(self, *shape):
        return IntervalArray._raw(self.lo.reshape(*shape), self.hi.reshape(*shape))

    def copy(self):
        return IntervalArray._raw(self.lo.copy(), self.hi.copy())

    def __repr__(self):
        if self.ndim == 0:
            return f"Interval[{self.lo!r}, {self.hi!r}]"
        return f"IntervalArray(shape={self.shape}, lo={self.lo!r}, hi={self.hi!r})"

    # inspection -----------------------------------------------------------
    @property
    def mid(self):
        return 0.5 * self.lo + 0.5 * self.hi

    @property
    def width(self):
        return add_ru(self.hi, -self.lo)

    def midrad(self):
        m = self.mid
        r = np.maximum(add_ru(self.hi, -m), add_ru(m, -self.lo))
        return m, np.where(self.lo == self.hi, 0.0, r)

    def mag(self):
        """Entrywise upper bound of |x|."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def mig(self):
        """Entrywise lower bound of |x|."""
        return np.where((self.lo <= 0) & (self.hi >= 0), 0.0, np.minimum(np.abs(self.lo), np.abs(self.hi)))

    def contains(self, x):
        x = np.asarray(x)
        return (self.lo <= x) & (x <= self.hi)

    def contains_zero(self):
        return (self.lo <= 0) & (self.hi >= 0)

    def subset_of(self, other) -> bool:
        other = as_interval(other)
        return bool(np.all(other.lo <= self.lo) and np.all(self.hi <= other.hi))

    def hull(self, other):
        other = as_interval(other)
        return IntervalArray._raw(np.minimum(self.lo, other.lo), np.maximum(self.hi, other.hi))

    def intersects(self, other):
        other = as_interval(other)
        return (self.lo <= other.hi) & (other.lo <= self.hi)

    # arithmetic -----------------------------------------------------------
    def __neg__(self):
        return IntervalArray._raw(-self.hi, -self.lo)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, ComplexIntervalArray) or _is_complex(other):
            return NotImplemented
        other = as_interval(other)
        return IntervalArray._raw(add_rd(self.lo, other.lo), add_ru(self.hi, other.hi))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ComplexIntervalArray) or _is_complex(other):
            return NotImplemented
        return self + (-as_interval(other))

    def __rsub__(self, other):
        if _is_complex(other):
            return NotImplemented
        return as_interval(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, ComplexIntervalArray) or _is_complex(other):
            return NotImplemented
        other = as_interval(other)
        a, b = self, other
        cands_lo = []
        cands_hi = []
        for x in (a.lo, a.hi):
            for y in (b.lo, b.hi):
                lo, hi = mul_pair(x, y)
                cands_lo.append(lo)
                cands_hi.append(hi)
        lo = np.minimum.reduce(np.broadcast_arrays(*cands_lo))
        hi = np.maximum.reduce(np.broadcast_arrays(*cands_hi))
        return IntervalArray._raw(np.asarray(lo), np.asarray(hi))

    __rmul__ = __mul__

    def reciprocal(self):
        if np.any(self.contains_zero()):
            raise IntervalError("division by an interval containing zero")
        lo = div_pair(1.0, self.hi)[0]
        hi = div_pair(1.0, self.lo)[1]
        return IntervalArray._raw(lo, hi)

    def __truediv__(self, other):
        if isinstance(other, ComplexIntervalArray) or _is_complex(other):
            return NotImplemented
        other = as_interval(other)
        if np.any(other.contains_zero()):
            raise IntervalError("division by an interval containing zero")
        cands_lo = []
        cands_hi = []
        for x in (self.lo, self.hi):
            for y in (other.lo, other.hi):
                lo, hi = div_pair(x, y)
                cands_lo.append(lo)
                cands_hi.append(hi)
        lo = np.minimum.reduce(np.broadcast_arrays(*cands_lo))
        hi = np.maximum.reduce(np.broadcast_arrays(*cands_hi))
        return IntervalArray._raw(np.asarray(lo), np.asarray(hi))

    def __rtruediv__(self, other):
        return as_interval(other) / self

    def sqr(self):
        """Tight square (exploits that x*x >= 0)."""
        lo_lo, lo_hi = mul_pair(self.lo, self.lo)
        hi_lo, hi_hi = mul_pair(self.hi, self.hi)
        hi = np.maximum(lo_hi, hi_hi)
        lo = np.where(self.contains_zero(), 0.0, np.maximum(np.minimum(lo_lo, hi_lo), 0.0))
        return IntervalArray._raw(lo, hi)

    def __matmul__(self, other):
        if isinstance(other, ComplexIntervalArray) or _is_complex(other):
            return NotImplemented
        return matmul(self, other)

    def __rmatmul__(self, other):
        if _is_complex(other):
            return NotImplemented
        return matmul(other, self)

    def sum(self, axis=None):
        if axis is None:
            return self.reshape(-1).sum(axis=0)
        x = IntervalArray._raw(np.moveaxis(self.lo, axis, 0), np.moveaxis(self.hi, axis, 0))
        k = x.shape[0]
        flat = x.reshape(k, -1)
        out = matmul(np.ones((1, k)), flat)
        return out.reshape(x.shape[1:])


Interval = IntervalArray


def _is_complex(x) -> bool:
    return isinstance(x, complex) or (isinstance(x, np.ndarray) and np.iscomplexobj(x))


def as_interval(x) -> IntervalArray:
    if isinstance(x, IntervalArray):
        return x
    if isinstance(x, ComplexIntervalArray):
        raise TypeError("expected a real interval")
    return IntervalArray.point(x)


def interval(lo, hi=None) -> IntervalArray:
    return IntervalArray(lo, hi)


def is_interval(x) -> bool:
    return isinstance(x, (IntervalArray, ComplexIntervalArray))


# ---------------------------------------------------------------------------
# matrix products
# ---------------------------------------------------------------------------

def _mr(x):
    if isinstance(x, IntervalArray):
        return x.midrad()
    x = np.asarray(x, dtype=float)
    return x, None


def matmul(a, b) -> IntervalArray:
    """Enclosure of every product of members of ``a`` and ``b``.

    Either operand may be a plain float array.  Uses
    ``|fl(AB) - AB| <= gamma_k |A||B|`` plus an underflow term.
    """
    am, ar = _mr(a)
    bm, br = _mr(b)
    vec = bm.ndim == 1
    if vec:
        bm = bm[:, None]
        br = None if br is None else br[:, None]
    k = am.shape[-1]
    gk = _up(k * _U / (1.0 - k * _U))
    c = am @ bm
    abs_am = np.abs(am)
    abs_bm = np.abs(bm)
    inner = gk * abs_bm if br is None else _up(gk * abs_bm + br)
    rad = abs_am @ inner
    if ar is not None:
        rad = rad + ar @ (abs_bm if br is None else _up(abs_bm + br))
    rad = _up(rad * (1.0 + 4.0 * (k + 2) * _U) + (k + 1) * _ETA)
    lo = _down(c - rad)
    hi = _up(c + rad)
    # entries whose every term has an exactly-zero factor are exactly zero
    sa = abs_am != 0 if ar is None else (abs_am != 0) | (ar != 0)
    sb = abs_bm != 0 if br is None else (abs_bm != 0) | (br != 0)
    dead = (sa.astype(float) @ sb.astype(float)) == 0
    if np.any(dead):
        lo = np.where(dead, 0.0, lo)
        hi = np.where(dead, 0.0, hi)
    if vec:
        lo = lo[:, 0]
        hi = hi[:, 0]
    return IntervalArray._raw(lo, hi)


# ---------------------------------------------------------------------------
# elementary functions
# ---------------------------------------------------------------------------

def _tanh_bounds(x):
    t = np.tanh(x)
    lo = t.copy()
    hi = t.copy()
    for _ in range(TANH_ULPS):
        lo = _down(lo)
        hi = _up(hi)
    # tanh has the sign of x and |tanh x| <= min(|x|, 1)
    lo = np.where(x >= 0, np.clip(lo, 0.0, x), np.maximum(lo, np.maximum(x, -1.0)))
    hi = np.where(x <= 0, np.clip(hi, x, 0.0), np.minimum(hi, np.minimum(x, 1.0)))
    return lo, hi


def tanh_enclosure(a, order: int = 0) -> IntervalArray:
    """Enclosure of tanh^(order) over ``a`` for order in 0..3.

    Order 0 uses monotonicity with a 4-ulp budget on the platform tanh;
    higher orders compose the order-0 enclosure T through
    1-T^2, -2T(1-T^2) and -2(1-T^2)(1-3T^2).
    """
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be 0, 1, 2 or 3")
    a = as_interval(a)
    t = IntervalArray._raw(_tanh_bounds(a.lo)[0], _tanh_bounds(a.hi)[1])
    if order == 0:
        return t
    s = 1.0 - t.sqr()
    s = IntervalArray._raw(np.maximum(s.lo, 0.0), np.minimum(s.hi, 1.0))
    if order == 1:
        return s
    if order == 2:
        return -2.0 * (t * s)
    return -2.0 * (s * (1.0 - 3.0 * t.sqr()))


def sqrt_enclosure(a) -> IntervalArray:
    a = as_interval(a)
    if np.any(a.lo < 0):
        raise IntervalError("square root of an interval with negative lower bound")
    return IntervalArray._raw(sqrt_pair(a.lo)[0], sqrt_pair(a.hi)[1])


def euclid_norm_upper(v) -> float:
    """Rigorous upper bound of ||x||_2 over every point x in ``v``."""
    m = as_interval(v).mag().reshape(-1)
    if m.size == 0:
        return 0.0
    sq = mul_pair(m, m)[1]
    total = math.fsum(sq)  # correctly rounded
    if total == 0.0:
        return 0.0
    return float(sqrt_pair(math.nextafter(total, math.inf))[1])


def opnorm_upper(M) -> float:
    """Upper bound of the induced 2-norm of every point matrix in ``M``.

    min(||M||_F, sqrt(||M||_1 ||M||_inf)) on entrywise magnitudes.
    """
    m = as_interval(M).mag()
    if m.size == 0:
        return 0.0
    fro = euclid_norm_upper(m)
    one = float(np.max(_sum_up(m, axis=0)))
    inf = float(np.max(_sum_up(m, axis=1)))
    mixed = float(sqrt_pair(mul_pair(one, inf)[1])[1])
    return min(fro, mixed)


# ---------------------------------------------------------------------------
# complex rectangles
# ---------------------------------------------------------------------------

class ComplexIntervalArray:
    """Rectangular complex enclosures ``re + i*im``."""

    __slots__ = ("re", "im")
    __array_ufunc__ = None

    def __init__(self, re, im=None):
        if isinstance(re, ComplexIntervalArray):
            re, im = re.re, re.im
        elif _is_complex(re) and im is None:
            z = np.asarray(re)
            re, im = z.real, z.imag
        self.re = as_interval(re)
        self.im = as_interval(np.zeros(self.re.shape) if im is None else im)

    @classmethod
    def point(cls, z):
        z = np.asarray(z, dtype=complex)
        return cls(IntervalArray.point(z.real), IntervalArray.point(z.imag))

    @property
    def shape(self):
        return self.re.shape

    def __len__(self):
        return len(self.re)

    def __getitem__(self, idx):
        return ComplexIntervalArray(self.re[idx], self.im[idx])

    def __repr__(self):
        return f"ComplexIntervalArray(re={self.re!r}, im={self.im!r})"

    @property
    def mid(self):
        return self.re.mid + 1j * self.im.mid

    def conj(self):
        return ComplexIntervalArray(self.re, -self.im)

    def contains(self, z):
        z = np.asarray(z)
        return self.re.contains(z.real) & self.im.contains(z.imag)

    def intersects(self, other):
        return self.re.intersects(other.re) & self.im.intersects(other.im)

    def mag(self):
        return np.sqrt(self.re.mag() ** 2 + self.im.mag() ** 2)

    def __neg__(self):
        return ComplexIntervalArray(-self.re, -self.im)

    def __add__(self, other):
        o = as_complex_interval(other)
        return ComplexIntervalArray(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = as_complex_interval(other)
        return ComplexIntervalArray(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return as_complex_interval(other) - self

    def __mul__(self, other):
        o = as_complex_interval(other)
        return ComplexIntervalArray(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def abs2(self) -> IntervalArray:
        return self.re.sqr() + self.im.sqr()

    def __truediv__(self, other):
        o = as_complex_interval(other)
        return (self * o.conj()) * ComplexIntervalArray(o.abs2().reciprocal())

    def __rtruediv__(self, other):
        return as_complex_interval(other) / self

    def __matmul__(self, other):
        o = as_complex_interval(other)
        return ComplexIntervalArray(self.re @ o.re - self.im @ o.im, self.re @ o.im + self.im @ o.re)

    def __rmatmul__(self, other):
        return as_complex_interval(other) @ self

    def sum(self, axis=None):
        return ComplexIntervalArray(self.re.sum(axis), self.im.sum(axis))


ComplexInterval = ComplexIntervalArray


def as_complex_interval(x) -> ComplexIntervalArray:
    if isinstance(x, ComplexIntervalArray):
        return x
    if isinstance(x, IntervalArray):
        return ComplexIntervalArray(x, IntervalArray.zeros(x.shape))
    return ComplexIntervalArray.point(x)


def inner(x, y) -> ComplexIntervalArray:
    """Enclosure of conj(x)^T y."""
    return (as_complex_interval(x).conj() * as_complex_interval(y)).sum()


def concatenate(parts, axis=0) -> IntervalArray:
    parts = [as_interval(p) for p in parts]
    return IntervalArray._raw(
        np.concatenate([p.lo for p in parts], axis=axis), np.concatenate([p.hi for p in parts], axis=axis)
    )


def block(rows) -> IntervalArray:
    """np.block for nested lists mixing float arrays and interval arrays."""
    rows = [[as_interval(b) for b in row] for row in rows]
    lo = np.block([[b.lo for b in row] for row in rows])
    hi = np.block([[b.hi for b in row] for row in rows])
    return IntervalArray._raw(lo, hi)
