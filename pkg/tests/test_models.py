import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hopfcert.interval import IntervalArray
from hopfcert.models import (
    FIXTURE_4D_M0,
    DiagonalElement,
    ExplicitAffine,
    GammaShift,
    OffDiagonalElement,
    PolynomialField,
    WeightStructure,
    antisymmetric_2d,
    build_weight_matrix,
    d2f_apply,
    d3f_apply,
    fixture_4d,
    jacobian,
    make_field,
    random_structure,
    xdir,
)

STRUCTURES = {
    "gamma_shift": lambda: random_structure(5, 3),
    "diagonal": lambda: random_structure(5, 3, coupling=DiagonalElement(2, 0.1)),
    "off_diagonal": lambda: random_structure(5, 3, coupling=OffDiagonalElement(1, 4, -0.05)),
    "multilayer": lambda: random_structure(4, 2, layers=3),
    "fixture4d": fixture_4d,
}


def central(fun, h=1e-5):
    return lambda t: (fun(t + h) - fun(t - h)) / (2 * h)


def relerr(a, b):
    return np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b)))


def test_random_structure_is_reproducible():
    a, b = random_structure(6, 42), random_structure(6, 42)
    assert np.array_equal(a.W, b.W) and np.array_equal(a.P, b.P)
    assert not np.array_equal(a.W, random_structure(6, 43).W)


def test_random_structure_rejects_tiny_dimension():
    with pytest.raises(ValueError):
        random_structure(1, 0)


@pytest.mark.parametrize(
    "coupling,exc",
    [(DiagonalElement(7), IndexError), (OffDiagonalElement(0, 9), IndexError), (OffDiagonalElement(2, 2), ValueError)],
)
def test_bad_coupling_indices(coupling, exc):
    with pytest.raises(exc):
        WeightStructure(n=4, W=np.zeros((4, 4)), P=np.zeros((4, 4)), coupling=coupling)


def test_bad_sign():
    with pytest.raises(ValueError):
        WeightStructure(n=2, W=np.zeros((2, 2)), P=np.zeros((2, 2)), sign=2.0)


@given(st.floats(-3, 3), st.integers(2, 8), st.integers(0, 1000))
def test_gamma_shift_symmetric_part_is_gamma(gamma, n, seed):
    s = random_structure(n, seed, perturbation_amplitude=0.0)
    W = build_weight_matrix(s, gamma)
    assert np.allclose(W + W.T, 2 * gamma * np.eye(n), atol=1e-12)


def test_element_couplings_move_one_entry():
    base = random_structure(5, 1, coupling=DiagonalElement(3, 0.0))
    W0, W1 = build_weight_matrix(base, 0.0), build_weight_matrix(base, 1.0)
    diff = W1 - W0
    assert diff[3, 3] == 1.0 and np.count_nonzero(diff) == 1
    off = random_structure(5, 1, coupling=OffDiagonalElement(0, 4, 0.2))
    diff = build_weight_matrix(off, 1.5) - build_weight_matrix(off, 0.5)
    assert diff[0, 4] == 1.0 and np.count_nonzero(diff) == 1


def test_fixture_coefficients_are_enclosed_exactly():
    M = build_weight_matrix(fixture_4d(), IntervalArray.point(0.0))
    for i, row in enumerate(FIXTURE_4D_M0):
        for j, v in enumerate(row):
            lo, hi = float(M.lo[i, j]), float(M.hi[i, j])
            assert lo <= float(v) <= hi and (hi - lo) <= 2 * np.spacing(abs(float(v)) + 1e-300)


def test_explicit_affine_scale_enters_diagonal():
    s = WeightStructure(n=2, W=np.zeros((2, 2)), P=np.zeros((2, 2)), coupling=ExplicitAffine((("1", "2"), ("3", "4")), "0.5"))
    assert np.allclose(build_weight_matrix(s, 2.0), [[2, 2], [3, 5]])


def test_multilayer_returns_one_matrix_per_layer():
    s = random_structure(4, 0, layers=3)
    Ws = build_weight_matrix(s, 0.3)
    assert len(Ws) == 3 and not np.allclose(Ws[0], Ws[1])


def test_jacobian_at_origin_is_signed_weight_matrix():
    for s in (random_structure(6, 0), fixture_4d()):
        vf = make_field(s)
        J = jacobian(vf, np.zeros(s.n), 0.37)
        assert np.allclose(J, s.sign * build_weight_matrix(s, 0.37), atol=1e-14)


@pytest.mark.parametrize("name", sorted(STRUCTURES))
def test_derivatives_match_finite_differences(name):
    s = STRUCTURES[name]()
    vf = make_field(s)
    rng = np.random.default_rng(1)
    n = s.n
    x = 0.3 * rng.standard_normal(n)
    g = 0.2
    u, v, w = rng.standard_normal((3, n))
    # first derivative, x and gamma
    fd = central(lambda t: vf.f(x + t * u, g))(0.0)
    assert relerr(vf.jacobian(x, g) @ u, fd) < 1e-8
    fd = central(lambda t: vf.f(x, g + t))(0.0)
    assert relerr(vf.dgamma(x, g), fd) < 1e-8
    # second and third derivatives from differences of lower ones
    fd = central(lambda t: vf.jacobian(x + t * v, g) @ u)(0.0)
    assert relerr(d2f_apply(vf, x, g, u, v), fd) < 1e-7
    fd = central(lambda t: d2f_apply(vf, x + t * w, g, u, v))(0.0)
    assert relerr(d3f_apply(vf, x, g, u, v, w), fd) < 1e-6


@pytest.mark.parametrize("name", sorted(STRUCTURES))
def test_mixed_gamma_derivative(name):
    s = STRUCTURES[name]()
    vf = make_field(s)
    rng = np.random.default_rng(5)
    x = 0.2 * rng.standard_normal(s.n)
    v = rng.standard_normal(s.n)
    e = np.zeros((s.n + 1, 1))
    e[s.n] = 1.0
    exact = vf.derivative(x, 0.1, [e, xdir(v)])[:, 0]
    fd = central(lambda t: vf.jacobian(x, 0.1 + t) @ v)(0.0)
    assert relerr(exact, fd) < 1e-7


@given(st.integers(0, 2**32 - 1), st.floats(1e-12, 1e-3))
def test_interval_jet_encloses_point_jets(seed, rad):
    rng = np.random.default_rng(seed)
    s = random_structure(4, seed % 17, layers=1 + seed % 2)
    vf = make_field(s)
    x = 0.5 * rng.standard_normal(4)
    g = float(rng.uniform(-0.5, 0.5))
    u, v, w = rng.standard_normal((3, 4))
    X = IntervalArray.from_midrad(x, rad)
    G = IntervalArray.from_midrad(g, rad)
    dirs = [xdir(u), xdir(v), xdir(w)]
    box = vf.derivative(X, G, dirs)
    xp = x + rad * rng.uniform(-1, 1, 4) * 0.999
    gp = g + rad * rng.uniform(-1, 1) * 0.999
    point = vf.derivative(xp, gp, dirs)
    assert np.all(box.lo <= point) and np.all(point <= box.hi)
    assert np.all(vf.f(X, G).contains(vf.f(xp, gp)))


def test_odd_fields_vanish_at_origin_exactly():
    vf = make_field(fixture_4d())
    assert vf.odd
    F = vf.f(IntervalArray.zeros((4,)), IntervalArray.from_midrad(-0.15, 1e-10))
    assert np.all(F.lo == 0) and np.all(F.hi == 0)
    H = vf.derivative(IntervalArray.zeros((4,)), IntervalArray.from_midrad(-0.15, 1e-10), [xdir(np.ones(4))] * 2)
    assert np.all(H.lo == 0) and np.all(H.hi == 0)


def test_biased_field_is_not_odd():
    s = random_structure(3, 0)
    s = WeightStructure(n=3, W=s.W, P=s.P, bias=np.array([0.1, 0.0, 0.0]))
    assert not make_field(s).odd


def test_antisymmetric_2d_weight():
    W = build_weight_matrix(antisymmetric_2d(2.0), 0.0)
    assert np.array_equal(W, [[0.0, 2.0], [-2.0, 0.0]])


def test_polynomial_field_derivatives():
    # f0 = 3 x0^2 x1 - gamma x1, f1 = x0 x1 x1
    pf = PolynomialField(2, [[(3.0, (0, 0, 1)), (-1.0, (2, 1))], [(1.0, (0, 1, 1))]])
    x = np.array([0.5, -2.0])
    assert np.allclose(pf.f(x, 0.25), [3 * 0.25 * -2 + 0.5, 0.5 * 4])
    J = pf.jacobian(x, 0.25)
    assert np.allclose(J, [[6 * 0.5 * -2, 3 * 0.25 - 0.25], [4.0, 2 * 0.5 * -2]])
    e0, e1 = np.eye(2)
    assert np.allclose(d3f_apply(pf, x, 0.25, e0, e0, e1), [6.0, 0.0])
    assert np.allclose(d3f_apply(pf, x, 0.25, e0, e1, e1), [0.0, 2.0])


def test_derivative_order_limit():
    vf = make_field(random_structure(3, 0))
    with pytest.raises(ValueError):
        vf.derivative(np.zeros(3), 0.0, [xdir(np.ones(3))] * 4)


def test_unknown_activation():
    s = random_structure(3, 0)
    with pytest.raises(ValueError):
        make_field(WeightStructure(n=3, W=s.W, P=s.P, activation="relu"))


def test_gamma_shift_default():
    assert isinstance(random_structure(3, 0).coupling, GammaShift)


def test_sampler_mean_and_variance():
    # 40 seeds x 2500 entries = 1e5 draws of W at n = 50
    draws = np.concatenate([random_structure(50, s).W.ravel() for s in range(40)])
    assert draws.size == 100_000
    assert abs(draws.mean()) < 0.02 and abs(draws.var() - 1) < 0.05
    p = np.concatenate([random_structure(50, s, 0.1).P.ravel() for s in range(40)]) / 0.1
    assert abs(p.mean()) < 0.02 and abs(p.var() - 1) < 0.05


@pytest.mark.parametrize("n", [2, 5, 20, 50])
def test_unperturbed_gamma_shift_spectrum_has_real_part_gamma(n):
    rng = np.random.default_rng(n)
    for seed in range(5):
        s = random_structure(n, seed, perturbation_amplitude=0.0)
        g = float(rng.uniform(-1, 1))
        mu = np.linalg.eigvals(build_weight_matrix(s, g))
        assert np.max(np.abs(mu.real - g)) < 1e-10


@pytest.mark.parametrize("name", sorted(STRUCTURES))
def test_derivatives_at_many_points(name):
    s = STRUCTURES[name]()
    vf = make_field(s)
    rng = np.random.default_rng(17)
    h = 1e-6
    worst = 0.0
    for _ in range(100):
        x = 0.5 * rng.standard_normal(s.n)
        g = float(rng.uniform(-0.5, 0.5))
        u, v, w = rng.standard_normal((3, s.n))
        J = vf.jacobian(x, g)
        fd = np.column_stack([(vf.f(x + h * e, g) - vf.f(x - h * e, g)) / (2 * h) for e in np.eye(s.n)])
        worst = max(worst, relerr(J, fd))
        fd = (vf.jacobian(x + h * v, g) @ u - vf.jacobian(x - h * v, g) @ u) / (2 * h)
        worst = max(worst, relerr(d2f_apply(vf, x, g, u, v), fd))
        fd = (d2f_apply(vf, x + h * w, g, u, v) - d2f_apply(vf, x - h * w, g, u, v)) / (2 * h)
        worst = max(worst, relerr(d3f_apply(vf, x, g, u, v, w), fd))
    assert worst <= 1e-5


def test_interval_evaluation_contains_midpoint_values():
    rng = np.random.default_rng(99)
    fields = [make_field(STRUCTURES[k]()) for k in sorted(STRUCTURES)]
    for trial in range(1000):
        vf = fields[trial % len(fields)]
        x = rng.standard_normal(vf.n)
        g = float(rng.uniform(-1, 1))
        rad = 10.0 ** rng.uniform(-14, -2)
        X = IntervalArray.from_midrad(x, rad)
        G = IntervalArray.from_midrad(g, rad)
        assert np.all(vf.f(X, G).contains(vf.f(x, g)))
        u = rng.standard_normal(vf.n)
        assert np.all(vf.derivative(X, G, [xdir(u)] * 3).contains(vf.derivative(x, g, [xdir(u)] * 3)))
