import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from hopfcert.interval import ComplexIntervalArray, IntervalArray, inner
from hopfcert.lyapunov import Sign, first_lyapunov, lyapunov_float, normalize_pair, sign_of
from hopfcert.models import PolynomialField, antisymmetric_2d, build_weight_matrix, fixture_4d, make_field
from hopfcert.pipeline import SolverConfig, process_pair


def normal_form(sigma: float, quadratic: float = 0.0) -> PolynomialField:
    """x' = g x - y + s x r^2 + q x^2,  y' = x + g y + s y r^2 (variable 2 is g)."""
    fx = [(1.0, (2, 0)), (-1.0, (1,)), (sigma, (0, 0, 0)), (sigma, (0, 1, 1))]
    if quadratic:
        fx.append((quadratic, (0, 0)))
    fy = [(1.0, (0,)), (1.0, (2, 1)), (sigma, (0, 0, 1)), (sigma, (1, 1, 1))]
    return PolynomialField(2, [fx, fy])


@pytest.fixture(scope="module")
def fixture_results():
    s = fixture_4d()
    vf = make_field(s)
    return s, vf, [process_pair(vf, j, SolverConfig()) for j in range(2)]


@pytest.mark.parametrize("sigma", [1.0, -1.0, 0.25, -3.0])
def test_normal_form_sign_and_value(sigma):
    r = process_pair(normal_form(sigma), 0, SolverConfig())
    assert r.nondegenerate, r.message
    l1 = r.lyapunov.l1
    assert not (l1.lo <= 0 <= l1.hi)
    assert r.lyapunov.sign is (Sign.POSITIVE if sigma > 0 else Sign.NEGATIVE)
    assert l1.lo <= oracles.normal_form_l1(sigma) <= l1.hi
    assert l1.hi - l1.lo < 1e-10


def test_even_quadratic_term_does_not_break_the_proof():
    # x^2 gives B != 0 at the origin, exercising both linear solves
    r = process_pair(normal_form(-1.0, quadratic=0.5), 0, SolverConfig())
    assert r.nondegenerate
    q = r.lyapunov.quadratic
    assert not (float(q.lo) == 0.0 and float(q.hi) == 0.0)
    vf = normal_form(-1.0, quadratic=0.5)
    ref = lyapunov_float(vf, r.candidate.x, r.candidate.gamma)
    assert r.lyapunov.l1.lo - 1e-12 <= ref <= r.lyapunov.l1.hi + 1e-12


def test_fixture_matches_high_precision_oracle(fixture_results):
    s, _vf, results = fixture_results
    for r in results:
        M = build_weight_matrix(s, r.candidate.gamma)
        ref = oracles.l1_tanh_at_origin(M, s.sign)
        l1 = r.lyapunov.l1
        assert l1.lo - 1e-12 <= ref <= l1.hi + 1e-12


def test_fixture_signs(fixture_results):
    _s, _vf, results = fixture_results
    by_gamma = sorted(results, key=lambda r: r.candidate.gamma, reverse=True)
    # the crossing closer to zero is subcritical, the other supercritical
    assert by_gamma[0].lyapunov.sign is Sign.POSITIVE
    assert by_gamma[1].lyapunov.sign is Sign.NEGATIVE


def test_quadratic_term_vanishes_exactly_at_the_origin(fixture_results):
    _s, _vf, results = fixture_results
    for r in results:
        q = r.lyapunov.quadratic
        assert float(q.lo) == 0.0 and float(q.hi) == 0.0


def test_normalization_residuals_contain_zero(fixture_results):
    _s, _vf, results = fixture_results
    for r in results:
        for res in r.lyapunov.normalization_residuals:
            assert bool(res.re.contains_zero()) and bool(res.im.contains_zero())


def test_float_value_inside_enclosure(fixture_results):
    _s, vf, results = fixture_results
    for r in results:
        ref = lyapunov_float(vf, r.candidate.x, r.candidate.gamma)
        assert r.lyapunov.l1.lo - 1e-13 <= ref <= r.lyapunov.l1.hi + 1e-13


@given(st.floats(0, 2 * np.pi), st.floats(0.1, 10.0))
@settings(max_examples=25, deadline=None)
def test_l1_does_not_depend_on_eigenvector_scaling(fixture_results, phase, scale):
    _s, vf, results = fixture_results
    r = max(results, key=lambda r: r.candidate.gamma)
    J = vf.jacobian(r.candidate.x, r.candidate.gamma)
    w_, V = np.linalg.eig(J)
    k = int(np.argmax(w_.imag))
    wl, W = np.linalg.eig(J.T)
    kk = int(np.argmin(np.abs(wl - w_[k].conjugate())))
    box = (IntervalArray.point(r.candidate.x), IntervalArray.point(r.candidate.gamma))
    lam = ComplexIntervalArray.point(np.array(w_[k]))
    c = scale * np.exp(1j * phase)
    base = first_lyapunov(vf, box, ComplexIntervalArray.point(V[:, k]), ComplexIntervalArray.point(W[:, kk]), lam)
    rot = first_lyapunov(vf, box, ComplexIntervalArray.point(c * V[:, k]), ComplexIntervalArray.point(W[:, kk] / c), lam)
    assert base.sign is rot.sign is Sign.POSITIVE
    assert abs(float(base.l1.mid) - float(rot.l1.mid)) < 1e-12


def test_normalize_pair():
    v = ComplexIntervalArray.point(np.array([3.0 + 0j, 4j]))
    w = ComplexIntervalArray.point(np.array([1.0 + 1j, 2.0 + 0j]))
    vn, wn = normalize_pair(v, w)
    assert bool(inner(vn, vn).re.contains(1.0)) and bool(inner(vn, wn).re.contains(1.0))
    assert bool(inner(vn, wn).im.contains(0.0))


def test_normalize_pair_rejects_orthogonal_adjoint():
    v = ComplexIntervalArray.point(np.array([1.0 + 0j, 0j]))
    w = ComplexIntervalArray.point(np.array([0j, 1.0 + 0j]))
    assert normalize_pair(v, w) is None


def test_sign_of():
    assert sign_of(IntervalArray(0.1, 0.2)) is Sign.POSITIVE
    assert sign_of(IntervalArray(-0.2, -0.1)) is Sign.NEGATIVE
    assert sign_of(IntervalArray(-0.1, 0.2)) is Sign.INCONCLUSIVE
    assert sign_of(IntervalArray(0.0, 0.0)) is Sign.INCONCLUSIVE


def test_hamiltonian_2d_case_is_inconclusive():
    # at gamma = 0 the antisymmetric field conserves log cosh(a x) + log cosh(a y), so l1 = 0
    r = process_pair(make_field(antisymmetric_2d(1.0)), 0, SolverConfig())
    assert r.gap_passed
    assert r.lyapunov.sign is Sign.INCONCLUSIVE
    assert r.lyapunov.l1.lo <= 0 <= r.lyapunov.l1.hi


def test_bad_eigenvalue_rejected():
    vf = normal_form(1.0)
    lam = ComplexIntervalArray(IntervalArray(0.0, 0.0), IntervalArray(-1.0, 1.0))
    v = ComplexIntervalArray.point(np.array([1.0, -1j]) / np.sqrt(2))
    res = first_lyapunov(vf, (IntervalArray.zeros((2,)), IntervalArray.point(0.0)), v, v, lam)
    assert res.sign is Sign.INCONCLUSIVE and res.l1 is None
