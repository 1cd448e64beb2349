import math

import numpy as np
import pytest

from models import InvalidReebVectorError, QuadClass, ReebVector, SolitonStatus


@pytest.fixture
def square(sasaki):
    return sasaki.delzant_square()


@pytest.fixture
def reeb():
    return ReebVector(b0=3, b1=0, b2=1)


def test_characteristic_polytope_vertices(sasaki, square, reeb):
    char = sasaki.characteristic_polytope(square, reeb)
    assert char.chart_index == 0
    expected = {(-0.25, -0.25), (0.25, -0.25), (0.125, 0.125), (-0.125, 0.125)}
    got = {tuple(round(c, 12) for c in v) for v in char.polytope.vertices}
    assert got == expected
    assert char.polytope.signed_area > 0
    assert sorted(char.facet_map) == [0, 1, 2, 3]


def test_characteristic_polytope_requires_positive_reeb(sasaki, square):
    with pytest.raises(InvalidReebVectorError):
        sasaki.characteristic_polytope(square, ReebVector(b0=1, b1=0, b2=2))


def test_characteristic_polytope_normalizes_to_trapezoid(sasaki, polytopes, square, reeb):
    char = sasaki.characteristic_polytope(square, reeb)
    assert polytopes.classify(char.polytope) == QuadClass.TRAPEZOID
    params, _ = polytopes.normalize(char.polytope)
    assert params.alpha == pytest.approx((3 / 8, 3 / 4))
    assert params.beta == pytest.approx((0.0, 2 / 3), abs=1e-12)
    assert params.c == pytest.approx((32 / 9, -8 / 9, -1.0, 1.0))
    sides = polytopes.monotone_sides(params)
    assert sides.lhs == pytest.approx(3.0)
    assert sides.rhs == pytest.approx(3.0)


def test_pullback_equipoise(sasaki, square, reeb):
    base, chart = sasaki.pullback_equipoise_check((0.0, 0.0, 1.0), square, reeb)
    assert base == pytest.approx(0.0, abs=1e-15)
    assert chart == pytest.approx(0.0, abs=1e-15)
    base, chart = sasaki.pullback_equipoise_check((0.0, 1.0, 0.0), square, reeb)
    assert base == pytest.approx(-0.25)
    assert abs(chart) == pytest.approx(0.25)


def test_chart_function_lifts_back(sasaki, square, reeb):
    char = sasaki.characteristic_polytope(square, reeb)
    vector = np.array([0.3, -0.7, 1.1])
    restricted = sasaki.chart_function(char, vector)
    np.testing.assert_allclose(sasaki.lift_affine(char, restricted.linear, restricted.constant), vector, atol=1e-15)
    for image in char.images:
        point = np.asarray(image)[[1, 2]]
        assert restricted(point) == pytest.approx(float(vector @ np.asarray(image)))


@pytest.mark.parametrize(
    "b0, b1, b2, expected",
    [
        (3, 0, 0, "regular"),
        (3, 0, 1, "quasi-regular"),
        (1, 0, math.sqrt(2) - 1, "irregular"),
    ],
)
def test_reeb_regularity(sasaki, b0, b1, b2, expected):
    assert sasaki.reeb_regularity(ReebVector(b0=b0, b1=b1, b2=b2)) == expected


# ----------------------------------------------------------------------
# Familia sobre el cuadrado
# ----------------------------------------------------------------------


def test_family_symmetric_reeb_is_kahler_einstein(sasaki):
    result = sasaki.s2s3_family(3.0, 0.0, verify=False)
    assert result.classification == QuadClass.PARALLELOGRAM
    assert result.solution.a == pytest.approx((0.0, 0.0), abs=1e-12)
    assert result.regularity == "regular"
    assert result.equipoised


def test_family_member(sasaki, solver):
    result = sasaki.s2s3_family(3.0, 1.0)
    assert result.classification == QuadClass.TRAPEZOID
    assert result.solution.status == SolitonStatus.SOLITON
    assert result.regularity == "quasi-regular"
    assert result.equipoised
    assert result.residual is not None and result.residual.passed
    assert abs(result.solution.a[0]) > 1e-6
    residual = solver.soliton_vector_residual(result.params, result.solution.a)
    assert residual == pytest.approx((0.0, 0.0), abs=1e-9)


def test_family_requires_dominant_b0(sasaki):
    with pytest.raises(InvalidReebVectorError):
        sasaki.s2s3_family(1.0, 2.0)


def test_continuity_towards_symmetric_reeb(sasaki):
    rows, decreasing = sasaki.continuity_check(3.0, [1.0, 0.5, 0.25, 0.125])
    assert [row[0] for row in rows] == [1.0, 0.5, 0.25, 0.125]
    assert decreasing
