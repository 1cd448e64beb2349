import pytest

from models import (
    CanonicalParameters,
    ExpQuadEngine,
    PolytopeEngine,
    QuadClass,
    SasakiEngine,
    SolitonSolver,
    SolverSettings,
    VerificationEngine,
)


@pytest.fixture
def settings():
    return SolverSettings()


@pytest.fixture
def quad(settings):
    return ExpQuadEngine(settings)


@pytest.fixture
def polytopes(settings):
    return PolytopeEngine(settings)


@pytest.fixture
def solver(settings, quad, polytopes):
    return SolitonSolver(settings, quad, polytopes)


@pytest.fixture
def verifier(settings, polytopes):
    return VerificationEngine(settings, polytopes)


@pytest.fixture
def sasaki(settings, solver, verifier):
    return SasakiEngine(settings, solver, verifier)


# Parámetros canónicos de referencia


@pytest.fixture
def unit_square():
    return CanonicalParameters(case=QuadClass.PARALLELOGRAM, alpha=(0, 1), beta=(0, 1), c=(1, -1, -1, 1))


@pytest.fixture
def rectangle():
    return CanonicalParameters(case=QuadClass.PARALLELOGRAM, alpha=(0, 1), beta=(0, 2), c=(1, -1, -2, 1))


@pytest.fixture
def calabi():
    return CanonicalParameters(case=QuadClass.TRAPEZOID, alpha=(1, 2), beta=(0, 1), c=(1, -1, -1, 1))


@pytest.fixture
def monotone_calabi():
    return CanonicalParameters(case=QuadClass.TRAPEZOID, alpha=(1, 2), beta=(0, 1), c=(1.5, -0.75, -1, 1))


@pytest.fixture
def kite():
    return CanonicalParameters(case=QuadClass.GENERIC, alpha=(2, 3), beta=(0, 1), c=(1, -1, -1, 1))


@pytest.fixture
def family_example():
    # (r, k, l, p) = (-1, 1, 2, 3) en β = 0.6
    return CanonicalParameters(case=QuadClass.GENERIC, alpha=(1, 3), beta=(0, 0.6), c=(1.2, -0.2, -1.2, 1))


@pytest.fixture
def fubini_study():
    return CanonicalParameters(case=QuadClass.CALABI_TRIANGLE, alpha=(0, 1), beta=(0, 1), c=(None, -1, -1, 1))
