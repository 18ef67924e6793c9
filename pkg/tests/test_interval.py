import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import oracles
from hopfcert.interval import (
    ComplexIntervalArray,
    IntervalArray,
    IntervalError,
    as_interval,
    euclid_norm_upper,
    float_enclosure,
    inner,
    interval,
    matmul,
    opnorm_upper,
    sqrt_enclosure,
    tanh_enclosure,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)
small = st.floats(min_value=-20, max_value=20, allow_nan=False, allow_infinity=False)
nonneg = st.floats(min_value=0, max_value=1e6, allow_nan=False, allow_infinity=False)


def ordered(a, b):
    return (a, b) if a <= b else (b, a)


@st.composite
def intervals(draw, elements=finite):
    lo, hi = ordered(draw(elements), draw(elements))
    return lo, hi


@st.composite
def nested(draw, elements=finite):
    """(inner, outer) interval pairs with inner inside outer."""
    a, b, c, d = sorted(draw(st.lists(elements, min_size=4, max_size=4)))
    return (b, c), (a, d)


def member(draw, lo, hi):
    t = draw(st.floats(min_value=0, max_value=1))
    x = lo + t * (hi - lo)
    return min(max(x, lo), hi)


# ---------------------------------------------------------------------------
# examples
# ---------------------------------------------------------------------------


def test_product_of_positive_intervals():
    r = interval(1, 2) * interval(3, 4)
    assert (float(r.lo), float(r.hi)) == (3.0, 8.0)


def test_symmetric_product():
    r = interval(-1, 1) * interval(-1, 1)
    assert (float(r.lo), float(r.hi)) == (-1.0, 1.0)


def test_one_third_is_tight():
    r = interval(1.0) / interval(3.0)
    assert oracles.inside(oracles.exact("div", 1.0, 3.0), float(r.lo), float(r.hi))
    assert float(r.hi) <= math.nextafter(math.nextafter(float(r.lo), 2), 2)


def test_division_by_zero_interval_raises():
    with pytest.raises(IntervalError):
        interval(1, 2) / interval(-1, 1)


def test_inverted_bounds_rejected():
    with pytest.raises(IntervalError):
        IntervalArray(2.0, 1.0)


def test_tanh_at_zero_is_exact():
    for order in (0, 2):
        r = tanh_enclosure(interval(0.0), order)
        assert float(r.lo) == 0.0 and float(r.hi) == 0.0


def test_tanh_one_width_within_budget():
    r = tanh_enclosure(interval(1.0), 0)
    assert oracles.inside(mp.tanh(1), float(r.lo), float(r.hi))
    x = float(r.lo)
    for _ in range(4):
        x = math.nextafter(x, 2)
    # at most 4 ulp on either side of the platform value
    assert float(r.hi) <= math.nextafter(math.nextafter(math.nextafter(math.nextafter(x, 2), 2), 2), 2)


def test_tanh_order_out_of_range():
    with pytest.raises(ValueError):
        tanh_enclosure(interval(0.5), 4)


def test_sqrt_examples():
    r = sqrt_enclosure(interval(4, 9))
    assert (float(r.lo), float(r.hi)) == (2.0, 3.0)
    r = sqrt_enclosure(interval(0.0))
    assert (float(r.lo), float(r.hi)) == (0.0, 0.0)
    r = sqrt_enclosure(interval(2.0))
    assert oracles.inside(mp.sqrt(2), float(r.lo), float(r.hi))
    assert float(r.hi) <= math.nextafter(math.nextafter(float(r.lo), 2), 2)


def test_sqrt_negative_raises():
    with pytest.raises(IntervalError):
        sqrt_enclosure(interval(-1e-300, 1))


def test_opnorm_identity_and_zero():
    b = opnorm_upper(IntervalArray.point(np.eye(5)))
    assert 1.0 <= b <= math.sqrt(5) * (1 + 1e-15)
    assert opnorm_upper(IntervalArray.zeros((3, 3))) == 0.0


def test_opnorm_dominates_svd_on_random_matrices():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        M = rng.standard_normal((5, 5)) * 10.0 ** rng.uniform(-3, 3)
        assert opnorm_upper(M) >= np.linalg.norm(M, 2)


def test_euclid_norm_examples():
    e = np.zeros(4)
    e[2] = 1.0
    assert 1.0 <= euclid_norm_upper(e) <= 1.0 + 4e-16
    b = euclid_norm_upper(np.array([3.0, 4.0]))
    assert 5.0 <= b <= math.nextafter(math.nextafter(5.0, 6), 6)
    b = euclid_norm_upper(np.ones(100))
    x = 10.0
    for _ in range(4):
        x = math.nextafter(x, 11)
    assert 10.0 <= b <= x


def test_float_enclosure_of_decimal():
    lo, hi = float_enclosure("0.1")
    assert lo < hi and math.nextafter(lo, 1) == hi
    assert float_enclosure("0.5") == (0.5, 0.5)


def test_matmul_with_exact_zero_operand_is_exact():
    M = IntervalArray.from_midrad(np.ones((3, 3)), 1e-3)
    r = matmul(M, np.zeros(3))
    assert np.all(r.lo == 0) and np.all(r.hi == 0)


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------


@given(intervals(), intervals(), st.data(), st.sampled_from(["add", "sub", "mul"]))
def test_binary_ops_contain_exact_results(a, b, data, op):
    x, y = member(data.draw, *a), member(data.draw, *b)
    A, B = interval(*a), interval(*b)
    R = {"add": A + B, "sub": A - B, "mul": A * B}[op]
    assert oracles.inside(oracles.exact(op, x, y), float(R.lo), float(R.hi))


@given(intervals(), intervals(), st.data())
def test_division_contains_exact_result(a, b, data):
    assume(not (b[0] <= 0 <= b[1]))
    x, y = member(data.draw, *a), member(data.draw, *b)
    R = interval(*a) / interval(*b)
    assert oracles.inside(oracles.exact("div", x, y), float(R.lo), float(R.hi))


@given(nested(), nested(), st.sampled_from(["add", "sub", "mul"]))
def test_inclusion_monotonicity(ab, cd, op):
    (a, a2), (b, b2) = ab, cd
    f = {"add": lambda u, v: u + v, "sub": lambda u, v: u - v, "mul": lambda u, v: u * v}[op]
    small_r = f(interval(*a), interval(*b))
    big_r = f(interval(*a2), interval(*b2))
    assert small_r.subset_of(big_r)


@given(intervals(small), st.data(), st.integers(0, 3))
def test_tanh_orders_contain_exact_derivatives(a, data, order):
    x = member(data.draw, *a)
    R = tanh_enclosure(interval(*a), order)
    assert oracles.inside(oracles.tanh_derivative(x, order), float(R.lo), float(R.hi))


@given(nested(small), st.integers(0, 3))
def test_tanh_monotone_under_inclusion(ab, order):
    a, a2 = ab
    assert tanh_enclosure(interval(*a), order).subset_of(tanh_enclosure(interval(*a2), order))


@given(intervals(nonneg), st.data())
def test_sqrt_contains_exact(a, data):
    x = member(data.draw, *a)
    R = sqrt_enclosure(interval(*a))
    assert oracles.inside(oracles.sqrt(x), float(R.lo), float(R.hi))


def test_tanh_derivatives_contain_numerical_differentiation():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        c = rng.uniform(-4, 4)
        r = 10.0 ** rng.uniform(-12, -1)
        x = c + r * rng.uniform(-1, 1)
        box = interval(c - r, c + r)
        order = int(rng.integers(1, 4))
        fd = mp.diff(mp.tanh, mp.mpf(x), order)
        R = tanh_enclosure(box, order)
        assert oracles.inside(fd, float(R.lo), float(R.hi))


@given(st.lists(intervals(st.floats(-100, 100)), min_size=2, max_size=2), st.data())
def test_complex_product_contains_exact(parts, data):
    (a, b) = parts
    (c, d) = parts[::-1]
    z = ComplexIntervalArray(interval(*a), interval(*b))
    w = ComplexIntervalArray(interval(*c), interval(*d))
    zx = complex(member(data.draw, *a), member(data.draw, *b))
    wx = complex(member(data.draw, *c), member(data.draw, *d))
    p = z * w
    re = oracles.exact("sub", 0.0, 0.0) + oracles.exact("mul", zx.real, wx.real) - oracles.exact("mul", zx.imag, wx.imag)
    im = oracles.exact("mul", zx.real, wx.imag) + oracles.exact("mul", zx.imag, wx.real)
    assert oracles.inside(re, float(p.re.lo), float(p.re.hi))
    assert oracles.inside(im, float(p.im.lo), float(p.im.hi))


def test_inner_product_conjugates_first_argument():
    x = np.array([1 + 2j, 3 - 1j])
    y = np.array([2 - 1j, 1j])
    r = inner(ComplexIntervalArray.point(x), ComplexIntervalArray.point(y))
    assert bool(r.contains(np.vdot(x, y)))


@given(
    st.integers(1, 6),
    st.integers(1, 6),
    st.integers(0, 2**31 - 1),
    st.floats(0, 1e-3),
)
def test_matmul_encloses_point_products(m, k, seed, rad):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, k))
    B = rng.standard_normal((k, 3))
    AI = IntervalArray.from_midrad(A, rad)
    BI = IntervalArray.from_midrad(B, rad)
    R = matmul(AI, BI)
    # random members of the boxes
    Ap = A + rad * rng.uniform(-1, 1, A.shape) * (1 - 1e-12)
    Bp = B + rad * rng.uniform(-1, 1, B.shape) * (1 - 1e-12)
    exact = [[sum(oracles.exact("mul", Ap[i, t], Bp[t, j]) for t in range(k)) for j in range(3)] for i in range(m)]
    for i in range(m):
        for j in range(3):
            assert oracles.inside(exact[i][j], float(R.lo[i, j]), float(R.hi[i, j]))


def test_point_operands_broadcast_with_floats():
    r = 2.0 * as_interval(np.array([1.0, 2.0])) + 1.0
    assert np.all(r.lo == np.array([3.0, 5.0])) and np.all(r.hi == r.lo)
