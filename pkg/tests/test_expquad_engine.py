import numpy as np
import pytest
from scipy.integrate import quad as adaptive_quad

from models import BivariatePoly, InvalidInputError, NoUniqueRootError, Poly


def _reference(k, a, x0, x1):
    value, _ = adaptive_quad(lambda t: t**k * np.exp(-2 * a * t), x0, x1, epsabs=0.0, epsrel=1e-13, limit=200)
    magnitude, _ = adaptive_quad(
        lambda t: abs(t) ** k * np.exp(-2 * a * t), x0, x1, epsabs=0.0, epsrel=1e-13, limit=200
    )
    return value, magnitude


def test_moment_integral_matches_adaptive_quadrature(quad):
    rng = np.random.default_rng(20240611)
    for case in range(10_000):
        k = int(rng.integers(0, 7))
        x0 = float(rng.uniform(-2.0, 2.0))
        width = float(rng.uniform(0.05, 10.0))
        if case % 4 == 0:
            # rama de la serie: |a|·h < 1e-4
            a = float(rng.uniform(-1.0, 1.0)) * 5e-5 / width
        else:
            a = float(rng.uniform(-20.0, 20.0))
        expected, magnitude = _reference(k, a, x0, x0 + width)
        assert abs(quad.moment_integral(k, a, x0, x0 + width) - expected) <= 1e-11 * magnitude


@pytest.mark.parametrize("k", [0, 1, 2, 3, 6])
def test_moment_integral_at_zero_rate_is_polynomial(quad, k):
    x0, x1 = -0.7, 1.9
    expected = (x1 ** (k + 1) - x0 ** (k + 1)) / (k + 1)
    assert quad.moment_integral(k, 0.0, x0, x1) == pytest.approx(expected, rel=1e-13, abs=1e-14)
    assert quad.moment_integral(k, 1e-7, x0, x1) == pytest.approx(expected, rel=1e-5)


def test_moment_integral_reversed_limits(quad):
    assert quad.moment_integral(2, 0.4, 1.0, 0.0) == pytest.approx(-quad.moment_integral(2, 0.4, 0.0, 1.0))


def test_moment_integral_rejects_high_degree(quad):
    with pytest.raises(InvalidInputError):
        quad.moment_integral(7, 0.1, 0.0, 1.0)


def test_integrate_poly_exp_matches_quadrature(quad):
    f = Poly.of(0.5, -3.0, 1.25, 0.2)
    expected, _ = adaptive_quad(lambda t: f(t) * np.exp(-2 * 0.8 * t), -1.0, 2.5, epsabs=0.0, epsrel=1e-13)
    assert quad.integrate_poly_exp(f, 0.8, -1.0, 2.5) == pytest.approx(expected, rel=1e-12)


def test_rate_derivative_matches_central_difference(quad):
    f = Poly.of(-2.0, 6.0, -2.0)
    a, h = 0.3, 1e-5
    numeric = (quad.integrate_poly_exp(f, a + h, 2.0, 3.0) - quad.integrate_poly_exp(f, a - h, 2.0, 3.0)) / (2 * h)
    assert quad.rate_derivative(f, a, 2.0, 3.0) == pytest.approx(numeric, rel=1e-7)


def test_unique_rate_root_kite_values(quad):
    # ∫ p e^{x} = e^x (p - p' + p'') se anula en x = 2 y x = 3
    assert quad.unique_rate_root(Poly.of(-2.0, 6.0, -2.0), 2.0, 3.0) == pytest.approx(-0.5, abs=1e-10)
    assert quad.unique_rate_root(Poly.of(2.0, -6.0, 2.0), 0.0, 1.0) == pytest.approx(0.5, abs=1e-10)


def test_unique_rate_root_zero_mean_kernel(quad):
    assert quad.unique_rate_root(Poly.of(2.0, -4.0), 0.0, 1.0) == 0.0


def test_unique_rate_root_is_a_root(quad):
    f = Poly.of(1.0, -1.5)
    rate = quad.unique_rate_root(f, 0.0, 2.0)
    assert rate > 0
    assert quad.integrate_poly_exp(f, rate, 0.0, 2.0) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "kernel",
    [
        Poly.of(1.0, 1.0),
        Poly.of(0.1875, -1.0, 1.0),
        Poly.of(3.0),
    ],
)
def test_unique_rate_root_requires_single_sign_change(quad, kernel):
    with pytest.raises(NoUniqueRootError):
        quad.unique_rate_root(kernel, 0.0, 1.0)


def test_unique_rate_root_bracket_cap(settings, quad):
    capped = quad.__class__(settings.model_copy(update={"bracket_cap": 4.0}))
    # raíz de f muy cerca de x0: la tasa necesaria es enorme
    f = Poly.of(-1e-6, 1.0)
    with pytest.raises(NoUniqueRootError):
        capped.unique_rate_root(f, 0.0, 1.0)


def test_profile_solves_first_order_equation(quad):
    f = Poly.of(2.0 / 3.0, 4.0, -8.0 / 3.0)
    profile = quad.profile_from_kernel(f, 0.7, 1.0)
    x = np.linspace(1.05, 1.95, 7)
    h = 1e-5
    numeric = (profile.value(x + h) - profile.value(x - h)) / (2 * h)
    assert profile.value(1.0) == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(profile.derivative(x), numeric, rtol=1e-7, atol=1e-9)
    np.testing.assert_allclose(profile.derivative(x) - 1.4 * profile.value(x), f(x), rtol=1e-12, atol=1e-12)


def test_profile_closed_form_agrees(quad):
    f = Poly.of(1.0, -1.5, 0.25)
    profile = quad.profile_from_kernel(f, -0.45, 0.0)
    x = np.linspace(0.0, 2.0, 9)
    np.testing.assert_allclose(profile.closed_form(x), profile.value(x), rtol=1e-10, atol=1e-12)


def test_profile_at_zero_rate_is_antiderivative(quad):
    f = Poly.of(2.0, -4.0)
    profile = quad.profile_from_kernel(f, 0.0, 0.0)
    x = np.linspace(0.0, 1.0, 5)
    np.testing.assert_allclose(profile.value(x), 2 * x - 2 * x**2, atol=1e-14)
    np.testing.assert_allclose(profile.second_derivative(x), -4.0, atol=1e-12)


def test_poly_antiderivative_vanishes_at_lower_bound():
    f = Poly.of(1.0, 2.0, 3.0)
    primitive = f.antiderivative(0.5)
    assert primitive(0.5) == pytest.approx(0.0)
    assert primitive.derivative().coeffs == pytest.approx(f.coeffs)


def test_bivariate_difference_and_coefficients():
    first = BivariatePoly(np.array([[1.0, 2.0], [3.0, 4.0]]))
    second = BivariatePoly(np.array([[1.0, 0.0, 5.0]]))
    diff = first - second
    assert diff(0.5, 2.0) == pytest.approx(first(0.5, 2.0) - second(0.5, 2.0))
    assert diff.coefficient_in_x(1).coeffs == pytest.approx((3.0, 4.0))
    assert diff.x_degree() == 1
