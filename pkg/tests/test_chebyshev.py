import numpy as np
import pytest

from mifht import DomainError, PiecewiseFunction, cheb_eval, cheb_project
from mifht import make_interval_system
from mifht.chebyshev import (
    cauchy_plain_offcut,
    cheb1_nodes,
    cheb2_nodes,
    chebT_coeffs,
    chebT_integral,
    chebU_coeffs,
    chebU_first_moment,
    chebU_integral,
    chebU_to_T,
    clenshaw_T,
    clenshaw_U,
    fht_plain_pv,
    fht_weighted_offcut,
    fht_weighted_pv,
)


def test_cheb_project_constant():
    c = cheb_project(lambda x: np.ones_like(x), (-1, 1), N=8)
    np.testing.assert_allclose(c, np.eye(8)[0], atol=1e-14)


def test_cheb_project_linear():
    c = cheb_project(lambda x: x, (-1, 1), N=8)
    expect = np.zeros(8)
    expect[1] = 1.0
    np.testing.assert_allclose(c, expect, atol=1e-14)


def test_cheb_project_weighted_tag():
    c = cheb_project(lambda x: np.sqrt(1 - x * x), (-1, 1), N=8, weighted=True)
    np.testing.assert_allclose(c, np.eye(8)[0], atol=1e-13)


def test_cheb_project_requires_two_modes():
    with pytest.raises(ValueError):
        cheb_project(lambda x: x, (-1, 1), N=1)


def test_projection_round_trip_polynomial():
    rng = np.random.default_rng(1)
    coef = rng.standard_normal(12)
    fn = lambda x: clenshaw_T(coef, (x - 0.5) / 1.5)
    c = cheb_project(fn, (-1.0, 2.0), N=16)
    x = np.linspace(-1, 2, 33)
    np.testing.assert_allclose(cheb_eval(c, (-1.0, 2.0), x), fn(x), atol=1e-13)


def test_projection_exact_on_nodes():
    fn = lambda x: np.exp(x)
    c = cheb_project(fn, (0.0, 1.0), N=10)
    nodes = 0.5 + 0.5 * cheb1_nodes(10)
    np.testing.assert_allclose(cheb_eval(c, (0.0, 1.0), nodes), fn(nodes),
                               atol=1e-14)


def test_u_coeffs_round_trip():
    rng = np.random.default_rng(2)
    a = rng.standard_normal(9)
    vals = clenshaw_U(a, cheb2_nodes(9))
    np.testing.assert_allclose(chebU_coeffs(vals), a, atol=1e-13)


def test_u_to_t_conversion():
    rng = np.random.default_rng(3)
    a = rng.standard_normal(7)
    s = np.linspace(-1, 1, 41)
    np.testing.assert_allclose(clenshaw_T(chebU_to_T(a), s), clenshaw_U(a, s),
                               atol=1e-13)


def test_integrals():
    # int T_0 = 2, int T_2 = -2/3, odd vanish
    assert chebT_integral(np.array([1.0, 0, 0])) == pytest.approx(2.0)
    assert chebT_integral(np.array([0, 1.0, 0])) == pytest.approx(0.0)
    assert chebT_integral(np.array([0, 0, 1.0])) == pytest.approx(-2.0 / 3)
    # int U_0 = 2, int U_1 = 0, int U_2 = 2/3
    assert chebU_integral(np.array([1.0])) == pytest.approx(2.0)
    assert chebU_integral(np.array([0, 1.0])) == pytest.approx(0.0)
    assert chebU_integral(np.array([0, 0, 1.0])) == pytest.approx(2.0 / 3)
    # int s U_1 ds = int (U_2 + U_0)/2 = 4/3 over the pair
    assert chebU_first_moment(np.array([0, 1.0])) == pytest.approx(4.0 / 3)


def test_weighted_pv_matches_closed_form():
    # (1/pi) PV int w U_{k-1}/(t-s) = -T_k(s)
    s = np.linspace(-0.9, 0.9, 7)
    for k in (1, 2, 5):
        a = np.zeros(k)
        a[k - 1] = 1.0
        np.testing.assert_allclose(fht_weighted_pv(a, s),
                                   -np.cos(k * np.arccos(s)), atol=1e-13)


def test_weighted_offcut_decay_branch():
    a = np.array([1.0])
    for z in (2.5, -2.5, 1.0 + 1.0j):
        u = z + np.sqrt(complex(z) - 1) * np.sqrt(complex(z) + 1)
        val = fht_weighted_offcut(a, np.atleast_1d(u))[0]
        assert val == pytest.approx(-1.0 / u)


def test_plain_pv_recurrence_vs_oracle():
    from mifht import pv_oracle

    rng = np.random.default_rng(4)
    b = rng.standard_normal(10) * 0.5 ** np.arange(10)
    fn = lambda t: clenshaw_T(b, t)
    for s in (-0.62, 0.11, 0.83):
        spectral = np.sum(b * 0) + fht_plain_pv(b, np.array([s]))[0]
        oracle = pv_oracle(fn, (-1, 1), s)
        assert spectral == pytest.approx(oracle, abs=2e-11)


def test_cauchy_plain_offcut_vs_quadrature():
    from scipy.integrate import quad

    rng = np.random.default_rng(5)
    b = rng.standard_normal(8) * 0.6 ** np.arange(8)
    fn = lambda t: clenshaw_T(b, t)
    targets = np.array([1.8, -3.0, 0.5 + 0.8j, 1.02])
    vals = cauchy_plain_offcut(fn, targets)
    for tgt, got in zip(targets, vals):
        re = quad(lambda t: (fn(t) / (t - tgt)).real, -1, 1,
                  limit=400, epsabs=1e-13)[0]
        im = quad(lambda t: (fn(t) / (t - tgt)).imag, -1, 1,
                  limit=400, epsabs=1e-13)[0]
        assert got == pytest.approx((re + 1j * im) / np.pi, abs=5e-12)


def test_piecewise_eval_and_norm():
    sys = make_interval_system([(-2, -1), (1, 2)])
    pf = PiecewiseFunction.from_callable(sys, lambda x: x ** 2, N=8)
    x = np.array([-1.5, 1.25])
    np.testing.assert_allclose(pf(x), x ** 2, atol=1e-13)
    # ||x^2||_{L^2}^2 = int_{-2}^{-1} + int_1^2 x^4 = 2*(31/5)
    assert pf.norm2() == pytest.approx(np.sqrt(2 * 31.0 / 5), rel=1e-12)


def test_piecewise_outside_domain():
    sys = make_interval_system([(-1, 1)])
    pf = PiecewiseFunction.zeros(sys, 4)
    with pytest.raises(DomainError):
        pf(np.array([3.0]))


def test_piecewise_arithmetic_and_shift():
    sys = make_interval_system([(-1, 1), (2, 3)])
    f = PiecewiseFunction.from_callable(sys, lambda x: x, N=6)
    g = PiecewiseFunction.from_callable(sys, lambda x: 1 + 0 * x, N=4)
    h = f + 2.0 * g
    x = np.array([0.5, 2.5])
    np.testing.assert_allclose(h(x), x + 2, atol=1e-13)
    shifted = h.shift_piece_constants([2.0, 2.0])
    np.testing.assert_allclose(shifted(x), x, atol=1e-13)


def test_weighted_real_field_detected():
    sys = make_interval_system([(-1, 1)])
    pf = PiecewiseFunction(sys, [np.array([1.0, -0.5])], weighted=True)
    assert pf.field == "real"
    vals = pf(np.array([0.3]))
    assert vals.dtype == np.float64


def test_from_samples_projection():
    sys = make_interval_system([(0, 2)])
    x = np.linspace(0.05, 1.95, 40)
    pf = PiecewiseFunction.from_samples(sys, [x], [np.cos(x)], N=16)
    xs = np.linspace(0.1, 1.9, 17)
    np.testing.assert_allclose(pf(xs), np.cos(xs), atol=1e-10)
