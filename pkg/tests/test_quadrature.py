import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import beta as beta_fn

from besselriesz.quadrature import (
    QuadratureError,
    gauss_legendre_box,
    gegenbauer_integral,
    geometric_breaks,
    jacobi_interval_integral,
    left_weighted_integral,
    legendre_panels_integral,
)


@pytest.mark.parametrize("lam", [0.3, 0.5, 1.0, 1.7])
def test_gegenbauer_integral_constant(lam):
    # integral of (2t - t^2)^(lam-1) over (0, 2) is 2^(2 lam - 1) B(lam, lam)
    exact = 2.0 ** (2 * lam - 1) * beta_fn(lam, lam)
    val = gegenbauer_integral(lambda t: np.ones_like(t), lam)
    assert val == pytest.approx(exact, rel=1e-13)


def test_gegenbauer_integral_polynomial():
    lam = 0.8
    exact, _ = quad(
        lambda t: (2 * t - t * t) ** (lam - 1) * (t**3 - 2 * t + 5),
        0.0, 2.0, points=[0.0, 2.0], epsabs=1e-14, epsrel=1e-13,
    )
    val = gegenbauer_integral(lambda t: t**3 - 2 * t + 5, lam)
    assert val == pytest.approx(exact, rel=1e-12)


def test_gegenbauer_integral_peaked():
    # sharply peaked factor at t = 0 handled through the graded panels;
    # reference from 30-digit quadrature with explicit scale splitting
    # (plain scipy.quad loses 1.5% here and warns about roundoff)
    lam, eps = 0.6, 1e-8
    exact = 5.037694370628565
    val = gegenbauer_integral(lambda t: (eps + t) ** -0.4, lam, peak_scale=eps)
    assert val == pytest.approx(exact, rel=1e-12)


def test_gegenbauer_fixed_order_smooth_in_parameter():
    # fixed-order rule: the value is differentiable in parameters of g
    lam = 1.2
    vals = [
        gegenbauer_integral(lambda t: np.exp(-b * t), lam, fixed_order=64)
        for b in (2.0, 2.0 + 1e-7)
    ]
    assert abs(vals[1] - vals[0]) < 1e-6


def test_gegenbauer_nonconvergence_reports_estimate():
    rng = np.random.default_rng(0)
    with pytest.raises(QuadratureError) as err:
        gegenbauer_integral(
            lambda t: rng.standard_normal(t.shape), 0.9, max_order=64
        )
    assert err.value.error_estimate > 0


def test_left_weighted_integral():
    exact, _ = quad(lambda t: np.cos(t) * t**-0.3, 0.0, 1.0, points=[0.0])
    val = left_weighted_integral(np.cos, -0.3, np.array([0.0, 0.25, 1.0]))
    assert val == pytest.approx(exact, rel=1e-12)


def test_jacobi_interval_integral():
    # substituting u = 2 - t gives e^2 * lower incomplete gamma(1/2, 1.5)
    from scipy.special import gammainc

    exact = np.exp(2.0) * np.sqrt(np.pi) * gammainc(0.5, 1.5)
    val = jacobi_interval_integral(np.exp, 0.5, 2.0, right_exp=-0.5)
    assert val == pytest.approx(exact, rel=1e-12)


def test_legendre_panels_integral():
    breaks = geometric_breaks(1e-4, 1.0)[1:]
    exact, _ = quad(lambda s: 1.0 / (s + s * s), breaks[0], 1.0, epsrel=1e-13)
    val = legendre_panels_integral(lambda s: 1.0 / (s + s * s), breaks)
    assert val == pytest.approx(exact, rel=1e-11)


def test_geometric_breaks_structure():
    b = geometric_breaks(1e-3, 1.0)
    assert b[0] == 0.0 and b[1] == 1e-3 and b[-1] == 1.0
    assert np.all(np.diff(b) > 0)


def test_gauss_legendre_box_polynomial_exactness():
    rule = gauss_legendre_box([(0.0, 2.0), (-1.0, 3.0)], 8)
    val = float(np.dot(rule.weights, rule.nodes[:, 0] ** 3 * rule.nodes[:, 1] ** 2))
    exact = (2.0**4 / 4.0) * ((3.0**3 + 1.0) / 3.0)
    assert val == pytest.approx(exact, rel=1e-14)
    assert rule.weights.sum() == pytest.approx(8.0, rel=1e-14)
