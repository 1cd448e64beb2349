import numpy as np
import pytest

from models import (
    CanonicalParameters,
    InvalidInputError,
    NoSignChangeError,
    NoSolutionForAnsatzError,
    NotMonotoneError,
    QuadClass,
    SolitonStatus,
    UnsupportedError,
)


@pytest.mark.parametrize(
    "name, scal, m",
    [
        ("unit_square", 8.0, 4.0),
        ("rectangle", 5.5, 1.5),
        ("calabi", 16.0 / 3.0, -4.0),
        ("monotone_calabi", 16.0 / 3.0, -4.0),
        ("kite", 4.0, 6.0),
        ("fubini_study", 12.0, -4.0),
    ],
)
def test_average_scalar_closed_form(request, solver, name, scal, m):
    params = request.getfixturevalue(name)
    assert solver.average_scalar(params) == pytest.approx((scal, m))


# ----------------------------------------------------------------------
# Ansatz producto y de Calabi
# ----------------------------------------------------------------------


def test_product_square_is_kahler_einstein(solver, unit_square):
    solution = solver.solve(unit_square)
    assert solution.status == SolitonStatus.SOLITON
    assert solution.a == pytest.approx((0.0, 0.0), abs=1e-12)
    assert solution.preferred_point == pytest.approx((0.5, 0.5))
    x = np.linspace(0.0, 1.0, 7)
    np.testing.assert_allclose(solution.profile_a.value(x), 2 * x - 2 * x**2, atol=1e-13)
    assert solution.lambda_ == pytest.approx(2.0)


def test_product_rectangle_is_generalized(solver, quad, rectangle):
    solution = solver.solve(rectangle)
    assert solution.status == SolitonStatus.GENERALIZED
    assert not solution.monotone
    assert solution.rate_a == pytest.approx(0.0, abs=1e-12)
    assert solution.rate_b > 0
    _, f_b = solver.kernels(rectangle)
    assert quad.integrate_poly_exp(f_b, solution.rate_b, 0.0, 2.0) == pytest.approx(0.0, abs=1e-12)


def test_calabi_constants(solver, calabi):
    solution = solver.solve(calabi)
    assert solution.case == QuadClass.TRAPEZOID
    assert solution.scal_bar == pytest.approx(16.0 / 3.0)
    assert solution.m == pytest.approx(-4.0)
    assert solution.c_const == pytest.approx(2.0 / 3.0)
    assert solution.diagnostics["c_at_alpha2"] == pytest.approx(2.0 / 3.0)
    assert solution.a[1] == 0.0
    assert solution.status == SolitonStatus.GENERALIZED


def test_calabi_ansatz_violation(solver):
    params = CanonicalParameters(case=QuadClass.TRAPEZOID, alpha=(1, 2), beta=(0, 1), c=(1, -1, -1, 2))
    with pytest.raises(NoSolutionForAnsatzError) as info:
        solver.solve(params)
    assert info.value.exit_code == 2


def test_product_rejects_other_cases(solver, calabi):
    with pytest.raises(UnsupportedError):
        solver.solve_product(calabi)


# ----------------------------------------------------------------------
# Ansatz ortotórico
# ----------------------------------------------------------------------


def test_kite_has_no_orthotoric_soliton(solver, kite):
    solution = solver.solve(kite)
    assert solution.status == SolitonStatus.NO_ORTHOTORIC
    assert solution.rate_a == pytest.approx(-0.5, abs=1e-10)
    assert solution.rate_b == pytest.approx(0.5, abs=1e-10)


def test_kernels_of_kite(solver, kite):
    f_a, f_b = solver.kernels(kite)
    assert f_a.coeffs == pytest.approx((-2.0, 6.0, -2.0))
    assert f_b.coeffs == pytest.approx((2.0, -6.0, 2.0))


def test_fafb_difference_is_independent_of_x(solver, kite, family_example):
    for params in (kite, family_example):
        first, second, diff = solver.fafb_bivariate(params)
        assert diff.x_degree(tol=1e-12) == 0
        assert diff(0.3, 0.7) == pytest.approx(first(0.3, 0.7) - second(0.3, 0.7))


def test_csc_condition_on_kite(solver, kite):
    result = solver.csc_condition(kite)
    assert result["scal_bar"] == pytest.approx(4.0)
    assert not result["rate_a_zero"]
    assert not result["rate_b_zero"]
    assert type(result["rate_a_zero"]) is bool
    assert type(result["rate_b_zero"]) is bool
    assert all(type(result[key]) is float for key in ("scal_bar", "scal_for_zero_rate_a", "scal_for_zero_rate_b"))


def test_orthotoric_only_helpers_reject_calabi(solver, calabi):
    with pytest.raises(UnsupportedError):
        solver.fafb_bivariate(calabi)
    with pytest.raises(UnsupportedError):
        solver.csc_condition(calabi)


# ----------------------------------------------------------------------
# Familias racionales
# ----------------------------------------------------------------------


def test_family_parameters_reproduce_example(solver, family_example):
    params = solver.family_parameters(-1.0, 1.0, 2.0, 3.0, 0.6)
    assert params.alpha == pytest.approx(family_example.alpha)
    assert params.beta == pytest.approx(family_example.beta)
    assert params.c == pytest.approx(family_example.c)


def test_family_parameters_outside_domain(solver):
    with pytest.raises(InvalidInputError):
        solver.family_parameters(-1.0, 1.0, 2.0, 3.0, 0.4)


def test_family_root(solver):
    beta, solution = solver.solve_family(-1.0, 1.0, 2.0, 3.0, (0.6, 0.7))
    assert 0.6 < beta < 0.7
    assert abs(solver.family_gap(-1.0, 1.0, 2.0, 3.0, beta)) <= 1e-10
    assert solution.rate_a == pytest.approx(solution.rate_b, abs=1e-9)
    assert solution.status == SolitonStatus.GENERALIZED
    assert solution.a == (0.5 * (solution.rate_a + solution.rate_b), 0.0)
    assert solution.profile_a.rate == solution.profile_b.rate == solution.a[0]


def test_family_without_sign_change(solver, monkeypatch):
    monkeypatch.setattr(solver, "family_gap", lambda r, k, l, p, beta: 1.0)
    with pytest.raises(NoSignChangeError):
        solver.find_beta_for_family(-1.0, 1.0, 2.0, 3.0, (0.6, 0.7))


# ----------------------------------------------------------------------
# Planos proyectivos con pesos
# ----------------------------------------------------------------------


def test_simplex_sign_integrals_at_origin(solver):
    assert solver.simplex_sign_integrals(2.0, 0.5, 0.0, 0.0) == pytest.approx((-11.0 / 12.0, 7.0 / 12.0))


def test_simplex_ratios_from_weights(solver):
    assert solver.simplex_ratios_from_weights((3, 1, 2)) == pytest.approx((2.0, 2.0 / 3.0))


def test_simplex_requires_admissible_ratios(solver):
    with pytest.raises(InvalidInputError):
        solver.find_beta_for_simplex(0.5, 0.5)


def test_wpp_equal_weights_is_fubini_study(solver):
    solution = solver.solve_wpp_orthotoric((1, 1, 1))
    assert solution.diagnostics["beta"] == 0.0
    assert solution.params.c == pytest.approx((2.0, -1.0, -1.0, 2.0))
    assert solution.scal_bar == pytest.approx(6.0)
    assert solution.a == pytest.approx((0.0, 0.0), abs=1e-12)
    assert solution.status == SolitonStatus.SOLITON


def test_wpp_orthotoric_123(solver):
    solution = solver.solve_wpp_orthotoric((1, 2, 3))
    assert solution.status == SolitonStatus.SOLITON
    assert -1.0 < solution.diagnostics["beta"] < 1.0
    assert solution.rate_a == pytest.approx(solution.rate_b, abs=1e-9)
    assert solution.diagnostics["t"] == pytest.approx(2.0)
    assert solution.diagnostics["s"] == pytest.approx(2.0 / 3.0)


def test_wpp_orthotoric_rejects_two_equal_weights(solver):
    with pytest.raises(InvalidInputError):
        solver.solve_wpp_orthotoric((1, 1, 2))


def test_wpp_calabi_equal_weights(solver, fubini_study):
    solution = solver.solve_wpp_calabi((1, 1, 1))
    assert solution.params == fubini_study
    assert solution.scal_bar == pytest.approx(12.0)
    assert solution.m == pytest.approx(-4.0)
    assert solution.a[0] == pytest.approx(0.0, abs=1e-12)
    assert solution.diagnostics["triangle_scal_bar"] == pytest.approx(12.0)


def test_wpp_calabi_unequal_weights(solver):
    solution = solver.solve_wpp_calabi((2, 1, 1))
    assert solution.params.c[1] == pytest.approx(-0.5)
    assert solution.scal_bar == pytest.approx(16.0)
    assert abs(solution.a[0]) > 1e-3
    x = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(
        solver.calabi_triangle_profile(solution, x), solution.profile_a.value(x), rtol=1e-9, atol=1e-12
    )


def test_wpp_calabi_requires_two_equal_weights(solver):
    with pytest.raises(InvalidInputError):
        solver.solve_wpp_calabi((1, 2, 3))


def test_solve_polytope_simplex(solver, polytopes):
    poly = polytopes.build_polytope([(0, 0), (3, 0), (0, 1.5)], [(0, 1), (-1 / 3, -2 / 3), (1, 0)])
    classification, params, phi, solution = solver.solve_polytope(poly)
    assert classification.case == QuadClass.ORTHO_SIMPLEX
    assert params.b2 == params.a1
    assert solution.status == SolitonStatus.SOLITON
    assert phi.determinant != 0


# ----------------------------------------------------------------------
# Vector solitón
# ----------------------------------------------------------------------


@pytest.mark.parametrize("name", ["unit_square", "monotone_calabi", "fubini_study"])
def test_soliton_vector_residual_vanishes(request, solver, name):
    params = request.getfixturevalue(name)
    solution = solver.solve(params)
    assert solver.soliton_vector_residual(params, solution.a) == pytest.approx((0.0, 0.0), abs=1e-9)


@pytest.mark.parametrize("weights", [(1, 1, 1), (2, 1, 1)])
def test_soliton_vector_residual_calabi_triangles(solver, weights):
    solution = solver.solve_wpp_calabi(weights)
    assert solver.soliton_vector_residual(solution.params, solution.a) == pytest.approx((0.0, 0.0), abs=1e-9)


def test_soliton_vector_residual_weighted_simplex(solver):
    solution = solver.solve_wpp_orthotoric((1, 2, 3))
    assert solver.soliton_vector_residual(solution.params, solution.a) == pytest.approx((0.0, 0.0), abs=1e-8)


def test_soliton_vector_requires_monotone(solver, calabi):
    with pytest.raises(NotMonotoneError):
        solver.soliton_vector_residual(calabi, (0.0, 0.0))


@pytest.mark.parametrize("name, a", [("monotone_calabi", (0.3, 0.0)), ("kite", (0.2, 0.0))])
def test_soliton_vector_quadrature_agrees_with_separable_moments(request, solver, polytopes, name, a):
    params = request.getfixturevalue(name)
    _, point = polytopes.monotone_check(params)
    expected = solver.soliton_vector_residual(params, a)
    assert solver._soliton_vector_quadrature(params, a, point) == pytest.approx(expected, rel=1e-7, abs=1e-10)


# ----------------------------------------------------------------------
# Cono de etiquetas
# ----------------------------------------------------------------------


def test_normal_cone_monotone_ray_at_zero_rate(solver):
    cone = solver.normal_cone((2, 3, 0, 1), 0.0)
    assert not cone.is_empty
    ray = np.asarray(cone.monotone_ray)
    np.testing.assert_allclose(ray / ray[0] * 10.0, [10.0, -14.0, -14.0, 10.0], atol=1e-8)

    params = solver.cone_parameters(cone.shape, ray / ray[0] * 10.0)
    solution = solver.solve(params)
    assert solution.scal_bar == pytest.approx(48.0)
    assert solution.rate_a == pytest.approx(0.0, abs=1e-9)
    assert solution.rate_b == pytest.approx(0.0, abs=1e-9)
    assert solution.status == SolitonStatus.SOLITON
    csc = solver.csc_condition(params)
    assert csc["rate_a_zero"] and csc["rate_b_zero"]
    assert solver.soliton_vector_residual(params, solution.a) == pytest.approx((0.0, 0.0), abs=1e-9)


def test_normal_cone_rows_detect_kite_rates(solver):
    cone = solver.normal_cone((2, 3, 0, 1), -0.5)
    kite_labels = np.array([1.0, -1.0, -1.0, 1.0])
    assert np.dot(cone.rows[0], kite_labels) == pytest.approx(0.0, abs=1e-10)
    assert abs(np.dot(cone.rows[1], kite_labels)) > 1e-3


@pytest.mark.parametrize("a1", [-0.5, 0.7])
def test_normal_cone_members_resolve_with_fixed_rate(solver, a1):
    shape = (2, 3, 0, 1)
    cone = solver.normal_cone(shape, a1)
    assert not cone.is_empty

    sampled = solver.solve_orthotoric(solver.cone_parameters(shape, cone.sample(0.5)))
    assert sampled.rate_a == pytest.approx(a1, abs=1e-9)
    assert sampled.rate_b == pytest.approx(a1, abs=1e-9)
    assert sampled.status != SolitonStatus.NO_ORTHOTORIC

    assert cone.monotone_ray is not None
    params = solver.cone_parameters(shape, cone.monotone_ray)
    monotone = solver.solve_orthotoric(params)
    assert monotone.rate_a == pytest.approx(a1, abs=1e-9)
    assert monotone.rate_b == pytest.approx(a1, abs=1e-9)
    assert monotone.monotone
    assert monotone.status == SolitonStatus.SOLITON
    assert monotone.a[0] == 0.5 * (monotone.rate_a + monotone.rate_b)
    assert solver.soliton_vector_residual(params, monotone.a) == pytest.approx((0.0, 0.0), abs=1e-9)


def test_normal_cone_rejects_unordered_shape(solver):
    with pytest.raises(InvalidInputError):
        solver.normal_cone((0, 1, 2, 3), 0.0)
