import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from mpmath import mp

from models.errors import InvalidInputError, StencilError, UnsupportedError
from models.polytope_engine import PolytopeEngine
from models.schemas import (
    ApexDiagnostics,
    FacetCheck,
    QuadClass,
    ResidualReport,
    SolitonSolution,
    SolitonStatus,
)
from models.settings import SolverSettings, get_settings

logger = logging.getLogger(__name__)

# Pesos de diferencias centradas por orden: desplazamiento -> peso
FIRST_DIFF: Dict[int, Dict[int, Fraction]] = {
    2: {-1: Fraction(-1, 2), 1: Fraction(1, 2)},
    4: {-2: Fraction(1, 12), -1: Fraction(-2, 3), 1: Fraction(2, 3), 2: Fraction(-1, 12)},
}
SECOND_DIFF: Dict[int, Dict[int, Fraction]] = {
    2: {-1: Fraction(1), 0: Fraction(-2), 1: Fraction(1)},
    4: {-2: Fraction(-1, 12), -1: Fraction(4, 3), 0: Fraction(-5, 2), 1: Fraction(4, 3), 2: Fraction(-1, 12)},
}


def _weight(value: Fraction):
    return mp.mpf(value.numerator) / value.denominator


class ExactProfile:
    """A(x) = -Q(x) + Q(x₀) e^{2a(x-x₀)} con mpmath; Q' - 2aQ = -f"""

    def __init__(self, profile):
        f = [mp.mpf(c) for c in profile.kernel.coeffs] or [mp.mpf(0)]
        self.rate = mp.mpf(profile.rate)
        self.anchor = mp.mpf(profile.anchor)
        if profile.rate == 0.0:
            # A = F(x) - F(x₀) con F' = f
            primitive = [mp.mpf(0)] + [c / (j + 1) for j, c in enumerate(f)]
            self.poly = primitive[::-1]
            self.kappa = -mp.polyval(self.poly, self.anchor)
        else:
            q = [mp.mpf(0)] * len(f)
            for j in range(len(f) - 1, -1, -1):
                upper = (j + 1) * q[j + 1] if j + 1 < len(f) else 0
                q[j] = (f[j] + upper) / (2 * self.rate)
            self.poly = [-c for c in q[::-1]]
            self.kappa = -mp.polyval(self.poly, self.anchor)

    def __call__(self, x):
        value = mp.polyval(self.poly, x)
        if self.rate == 0:
            return value + self.kappa
        return value + self.kappa * mp.exp(2 * self.rate * (x - self.anchor))


class MetricField:
    """Matriz H^μ de la métrica en coordenadas de momento, construida con los perfiles A y B"""

    def __init__(self, solution: SolitonSolution, polytopes: PolytopeEngine):
        self.solution = solution
        self.case = solution.case
        self.params = solution.params
        self.polytope = polytopes.canonical_polytope(solution.params)
        self.profile_a = solution.profile_a
        self.profile_b = solution.profile_b
        normals = np.array([f.normal for f in self.polytope.facets])
        self._normals = normals
        self._offsets = np.array([f.offset for f in self.polytope.facets])
        self._norms = np.hypot(normals[:, 0], normals[:, 1])

    @property
    def local_scale(self) -> float:
        return float(np.min(np.ptp(self.polytope.vertex_array(), axis=0)))

    def to_moment(self, x, y) -> np.ndarray:
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if self.case == QuadClass.PARALLELOGRAM:
            return np.stack([x, y], axis=-1)
        if self.case.is_calabi:
            return np.stack([x, x * y], axis=-1)
        return np.stack([x + y, x * y], axis=-1)

    def from_moment(self, mu) -> Tuple[np.ndarray, np.ndarray]:
        mu = np.asarray(mu, dtype=float)
        m1, m2 = mu[..., 0], mu[..., 1]
        if self.case == QuadClass.PARALLELOGRAM:
            return m1, m2
        if self.case.is_calabi:
            return m1, m2 / m1
        root = np.sqrt(np.maximum(m1**2 - 4.0 * m2, 0.0))
        return 0.5 * (m1 + root), 0.5 * (m1 - root)

    def matrix_xy(self, x, y) -> np.ndarray:
        """H en función de las coordenadas separadas (x, y)"""
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        a_val = self.profile_a.value(x)
        b_val = self.profile_b.value(y)
        out = np.empty(np.broadcast(x, y).shape + (2, 2))
        if self.case == QuadClass.PARALLELOGRAM:
            out[..., 0, 0] = a_val
            out[..., 0, 1] = out[..., 1, 0] = 0.0
            out[..., 1, 1] = b_val
        elif self.case.is_calabi:
            out[..., 0, 0] = a_val / x
            out[..., 0, 1] = out[..., 1, 0] = y * a_val / x
            out[..., 1, 1] = (x**2 * b_val + y**2 * a_val) / x
        else:
            gap = x - y
            out[..., 0, 0] = (a_val + b_val) / gap
            out[..., 0, 1] = out[..., 1, 0] = (y * a_val + x * b_val) / gap
            out[..., 1, 1] = (y**2 * a_val + x**2 * b_val) / gap
        return out

    def matrix(self, mu) -> np.ndarray:
        x, y = self.from_moment(mu)
        return self.matrix_xy(x, y)

    def exact_profiles(self) -> Tuple[ExactProfile, ExactProfile]:
        """Perfiles en la precisión de mpmath vigente"""
        return ExactProfile(self.profile_a), ExactProfile(self.profile_b)

    def exact_matrix(self, profiles: Tuple[ExactProfile, ExactProfile], m1, m2):
        """(H11, H12, H22) en el punto μ = (m1, m2) con aritmética de mpmath"""
        prof_a, prof_b = profiles
        if self.case == QuadClass.PARALLELOGRAM:
            return prof_a(m1), mp.mpf(0), prof_b(m2)
        if self.case.is_calabi:
            x, y = m1, m2 / m1
            a_val, b_val = prof_a(x), prof_b(y)
            return a_val / x, y * a_val / x, (x**2 * b_val + y**2 * a_val) / x
        root = mp.sqrt(max(m1**2 - 4 * m2, 0))
        x, y = (m1 + root) / 2, (m1 - root) / 2
        a_val, b_val = prof_a(x), prof_b(y)
        gap = x - y
        return (a_val + b_val) / gap, (y * a_val + x * b_val) / gap, (y**2 * a_val + x**2 * b_val) / gap

    def boundary_distance(self, mu) -> np.ndarray:
        mu = np.asarray(mu, dtype=float)
        values = mu @ self._normals.T + self._offsets
        return np.min(values / self._norms, axis=-1)


class VerificationEngine:
    """Verificación independiente por diferencias finitas de la ecuación del solitón"""

    def __init__(self, settings: Optional[SolverSettings] = None, polytopes: Optional[PolytopeEngine] = None):
        self.settings = settings or get_settings()
        self.polytopes = polytopes or PolytopeEngine(self.settings)

    def field(self, solution: SolitonSolution) -> MetricField:
        return MetricField(solution, self.polytopes)

    # ------------------------------------------------------------------
    # Operadores discretos
    # ------------------------------------------------------------------

    def metric_matrix(self, solution: SolitonSolution, x: float, y: float) -> np.ndarray:
        """H^μ en el punto interior (x, y)"""
        degenerate = (
            (solution.case.is_calabi and x <= 0.0)
            or (solution.case.is_orthotoric and x <= y)
        )
        if degenerate:
            raise InvalidInputError(f"punto degenerado ({x}, {y})")
        return self.field(solution).matrix_xy(x, y)

    def _check_stencil(self, field: MetricField, mu: np.ndarray, step) -> None:
        if np.any(field.boundary_distance(mu) < 4.0 * np.asarray(step)):
            raise StencilError("el esténcil sale del polígono")

    def scalar_curvature_fd(self, field: MetricField, mu, step) -> np.ndarray:
        """Scal = -Σ ∂ᵢ∂ⱼ H_ij con diferencias centradas"""
        scal, _ = self.curvature_terms(field, mu, step)
        return scal

    def laplacian_affine_fd(self, field: MetricField, a: Sequence[float], mu, step) -> np.ndarray:
        """Δ⟨a,μ⟩ = -div(H a) con diferencias centradas"""
        _, lap = self.curvature_terms(field, mu, step, a)
        return lap

    def curvature_terms(
        self, field: MetricField, mu, step, a: Sequence[float] = (0.0, 0.0)
    ) -> Tuple[np.ndarray, np.ndarray]:
        """(Scal, Δ⟨a,μ⟩) por diferencias centradas de orden fd_order, evaluando H con mpmath"""
        mu = np.atleast_2d(np.asarray(mu, dtype=float))
        step = np.broadcast_to(np.asarray(step, dtype=float), mu.shape[:1])
        self._check_stencil(field, mu, step)
        first = FIRST_DIFF[self.settings.fd_order]
        second = SECOND_DIFF[self.settings.fd_order]
        scal = np.empty(len(mu))
        lap = np.empty(len(mu))
        with mp.workdps(self.settings.fd_precision):
            profiles = field.exact_profiles()
            a1, a2 = (mp.mpf(float(v)) for v in a)
            for n, (point, h) in enumerate(zip(mu, step)):
                m1, m2, hh = mp.mpf(float(point[0])), mp.mpf(float(point[1])), mp.mpf(float(h))
                cache = {}

                def at(i, j):
                    if (i, j) not in cache:
                        cache[(i, j)] = field.exact_matrix(profiles, m1 + i * hh, m2 + j * hh)
                    return cache[(i, j)]

                d11 = sum(_weight(w) * at(i, 0)[0] for i, w in second.items())
                d22 = sum(_weight(w) * at(0, j)[2] for j, w in second.items())
                d12 = sum(
                    _weight(wi) * _weight(wj) * at(i, j)[1]
                    for i, wi in first.items()
                    for j, wj in first.items()
                )
                flux_1 = sum(_weight(w) * (at(i, 0)[0] * a1 + at(i, 0)[1] * a2) for i, w in first.items())
                flux_2 = sum(_weight(w) * (at(0, j)[1] * a1 + at(0, j)[2] * a2) for j, w in first.items())
                scal[n] = float(-(d11 + 2 * d12 + d22) / hh**2)
                lap[n] = float(-(flux_1 + flux_2) / hh)
        return scal, lap

    def local_steps(self, field: MetricField, mu: np.ndarray) -> np.ndarray:
        """h = fd_scale · distancia al borde, con piso fd_floor"""
        if self.settings.fd_step is not None:
            return np.full(len(mu), self.settings.fd_step)
        return np.maximum(self.settings.fd_scale * field.boundary_distance(mu), self.settings.fd_floor)

    # ------------------------------------------------------------------
    # Residuo en malla
    # ------------------------------------------------------------------

    def grid(self, solution: SolitonSolution, points: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Malla n×n en el rectángulo (x, y) con margen relativo"""
        n = points or self.settings.grid_points
        margin = self.settings.grid_margin
        fractions = np.linspace(margin, 1.0 - margin, n)
        params = solution.params
        xs = params.a1 + (params.a2 - params.a1) * fractions
        ys = params.b1 + (params.b2 - params.b1) * fractions
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return gx.ravel(), gy.ravel()

    def soliton_residual(self, solution: SolitonSolution, points: Optional[int] = None) -> ResidualReport:
        """Scal_fd - Scal̄ - 2Δ⟨a,μ⟩ en la malla, más bordes, identidades de perfiles y ápice"""
        if solution.status == SolitonStatus.NO_ORTHOTORIC:
            raise UnsupportedError("no hay solución ortotórica que verificar")
        field = self.field(solution)
        xs, ys = self.grid(solution, points)
        mu = field.to_moment(xs, ys)
        steps = self.local_steps(field, mu)
        valid = field.boundary_distance(mu) >= 4.0 * steps
        skipped = int(np.count_nonzero(~valid))
        if skipped:
            logger.warning("%d puntos de la malla descartados por el esténcil", skipped)
        if not np.any(valid):
            raise StencilError("ningún punto de la malla admite el esténcil")

        mu_ok, steps_ok = mu[valid], steps[valid]
        scal, lap = self.curvature_terms(field, mu_ok, steps_ok, solution.a)
        residual = scal - solution.scal_bar - 2.0 * lap
        magnitude = np.abs(residual)

        metric = field.matrix(mu_ok)
        det = metric[:, 0, 0] * metric[:, 1, 1] - metric[:, 0, 1] ** 2
        positive = bool(np.all(det > 0) and np.all(metric[:, 0, 0] + metric[:, 1, 1] > 0))

        boundary = self.boundary_conditions(solution, field)
        identity_error, boundary_error, profiles_positive = self.profile_identities(solution)
        apex = self.apex_smoothness(solution, field) if solution.case.is_triangle else None

        max_residual = float(magnitude.max())
        tolerance = self.settings.residual_tol
        boundary_ok = all(
            c.value_error <= self.settings.bc_value_tol
            and c.derivative_error <= self.settings.bc_derivative_tol
            and c.tangent_positive
            for c in boundary
        )
        passed = (
            max_residual <= tolerance
            and positive
            and boundary_ok
            and identity_error <= self.settings.profile_identity_tol
            and boundary_error <= self.settings.profile_boundary_tol
            and profiles_positive
            and (apex is None or apex.passed)
        )
        samples = [
            (float(m[0]), float(m[1]), float(s), float(lp), float(r))
            for m, s, lp, r in zip(mu_ok, scal, lap, residual)
        ]
        return ResidualReport(
            max_residual=max_residual,
            mean_residual=float(magnitude.mean()),
            grid_points=int(valid.sum()),
            skipped_points=skipped,
            step=float(np.median(steps_ok)),
            positive_definite=positive,
            boundary=boundary,
            profile_identity_error=identity_error,
            profile_boundary_error=boundary_error,
            profiles_positive=profiles_positive,
            apex=apex,
            tolerance=tolerance,
            passed=passed,
            samples=samples,
        )

    def verify(self, solution: SolitonSolution) -> ResidualReport:
        return self.soliton_residual(solution)

    # ------------------------------------------------------------------
    # Condiciones de borde
    # ------------------------------------------------------------------

    def _facet_samples(self, solution: SolitonSolution) -> List[Tuple[str, np.ndarray, np.ndarray]]:
        """(faceta, x, y) muestreados en el interior de cada lado del rectángulo"""
        params = solution.params
        n = self.settings.bc_samples
        fractions = (np.arange(n) + 0.5) / n
        xs = params.a1 + (params.a2 - params.a1) * fractions
        ys = params.b1 + (params.b2 - params.b1) * fractions
        sides = [
            ("beta1", xs, np.full_like(xs, params.b1)),
            ("alpha2", np.full_like(ys, params.a2), ys),
            ("beta2", xs, np.full_like(xs, params.b2)),
            ("alpha1", np.full_like(ys, params.a1), ys),
        ]
        if solution.case == QuadClass.CALABI_TRIANGLE:
            sides = [side for side in sides if side[0] != "alpha1"]
        elif solution.case == QuadClass.ORTHO_SIMPLEX:
            # El lado x = β también es la faceta β₂
            sides = [side if side[0] != "alpha1" else ("beta2",) + side[1:] for side in sides]
        return sides

    def boundary_conditions(self, solution: SolitonSolution, field: Optional[MetricField] = None) -> List[FacetCheck]:
        """H(u_k,·) = 0 y dH(u_k,u_k) = 2u_k en cada faceta no colapsada"""
        field = field or self.field(solution)
        labels = {facet.name: np.asarray(facet.normal) for facet in field.polytope.facets}
        step = self.settings.fd_step or self.settings.fd_scale * field.local_scale
        checks = {}
        for name, xs, ys in self._facet_samples(solution):
            u = labels[name]
            size = float(np.hypot(*u))
            inward = u / size
            tangent = np.array([-inward[1], inward[0]])

            closed = field.matrix_xy(xs, ys)
            value_error = float(np.max(np.linalg.norm(closed @ u, axis=-1))) / size
            tangent_positive = bool(np.all(np.einsum("i,nij,j->n", tangent, closed, tangent) > 0))

            mu = field.to_moment(xs, ys)
            offsets = [field.matrix(mu + s * step * inward) for s in (1.0, 2.0, 3.0)]
            pairing = [np.einsum("i,nij,j->n", u, h_val, u) for h_val in offsets]
            slope = (-2.5 * pairing[0] + 4.0 * pairing[1] - 1.5 * pairing[2]) / step
            derivative_error = float(np.max(np.abs(slope - 2.0 * size))) / max(1.0, 2.0 * size)

            if name in checks:
                previous = checks[name]
                value_error = max(value_error, previous.value_error)
                derivative_error = max(derivative_error, previous.derivative_error)
                tangent_positive = tangent_positive and previous.tangent_positive
            checks[name] = FacetCheck(
                name=name,
                value_error=value_error,
                derivative_error=derivative_error,
                tangent_positive=tangent_positive,
            )
        return list(checks.values())

    # ------------------------------------------------------------------
    # Identidades de los perfiles
    # ------------------------------------------------------------------

    def profile_identities(self, solution: SolitonSolution) -> Tuple[float, float, bool]:
        """(error en las EDO, error en las condiciones de borde, positividad de A y B)"""
        params = solution.params
        n = self.settings.positivity_samples
        fractions = (np.arange(n) + 0.5) / n
        x = params.a1 + (params.a2 - params.a1) * fractions
        y = params.b1 + (params.b2 - params.b1) * fractions
        prof_a, prof_b = solution.profile_a, solution.profile_b
        a1, a2 = solution.a
        scal, m = solution.scal_bar, solution.m

        a_val, a_d1, a_d2 = prof_a.value(x), prof_a.derivative(x), prof_a.second_derivative(x)
        b_val, b_d1, b_d2 = prof_b.value(y), prof_b.derivative(y), prof_b.second_derivative(y)
        if solution.case == QuadClass.PARALLELOGRAM:
            eq_a = a_d2 - 2 * a1 * a_d1 - (m - scal)
            eq_b = b_d2 - 2 * a2 * b_d1 + m
        elif solution.case.is_calabi:
            eq_a = -a_d2 + 2 * a1 * a_d1 - x * scal - m
            eq_b = b_d2 - m
        else:
            eq_a = a_d2 - 2 * a1 * a_d1 + x * scal - m
            eq_b = b_d2 - 2 * a1 * b_d1 - y * scal + m
        size = max(1.0, abs(scal), abs(m))
        identity_error = float(max(np.max(np.abs(eq_a)), np.max(np.abs(eq_b)))) / size

        ca1, ca2, cb1, cb2 = params.c
        checks = [
            (prof_a, params.a2, ca2, 1.0),
            (prof_b, params.b1, cb1, -1.0),
        ]
        # La faceta colapsada no aporta condiciones
        if not solution.case.is_triangle:
            checks.append((prof_a, params.a1, ca1, 1.0))
        if solution.case != QuadClass.ORTHO_SIMPLEX:
            checks.append((prof_b, params.b2, cb2, -1.0))
        scale_a = max(1.0, float(np.max(np.abs(a_val))))
        scale_b = max(1.0, float(np.max(np.abs(b_val))))
        boundary_error = 0.0
        for profile, point, label, sign in checks:
            scale = scale_a if profile is prof_a else scale_b
            expected = sign * 2.0 / label
            boundary_error = max(
                boundary_error,
                abs(profile.value(point)) / scale,
                abs(profile.derivative(point) - expected) / abs(expected),
            )
        positive = bool(np.all(a_val > 0) and np.all(b_val > 0))
        return identity_error, boundary_error, positive

    # ------------------------------------------------------------------
    # Vértice colapsado
    # ------------------------------------------------------------------

    @staticmethod
    def _richardson(values: np.ndarray) -> Tuple[np.ndarray, float]:
        """Extrapolación de primer orden sobre radios que se dividen por 2"""
        extrapolated = 2.0 * values[1:] - values[:-1]
        return extrapolated[-1], float(np.max(np.abs(extrapolated[-1] - extrapolated[-2])))

    def apex_smoothness(self, solution: SolitonSolution, field: Optional[MetricField] = None) -> ApexDiagnostics:
        """Límites de H^μ por rayos hacia el vértice colapsado"""
        if not solution.case.is_triangle:
            raise UnsupportedError("la suavidad en el ápice sólo aplica a triángulos")
        field = field or self.field(solution)
        params = solution.params
        rays = self.settings.apex_rays
        tol = self.settings.apex_spread_tol
        radii = 0.25 * 0.5 ** np.arange(11)
        limits, expected = {}, {}

        if solution.case == QuadClass.CALABI_TRIANGLE:
            apex = (0.0, 0.0)
            xs = params.a2 * radii
            a_vals = solution.profile_a.value(xs)
            over_x, _ = self._richardson(a_vals / xs)
            over_x2, _ = self._richardson(a_vals / xs**2)
            limits.update({"A_over_x": float(over_x), "A_over_x2": float(over_x2)})
            expected.update({"A_over_x": 0.0, "A_over_x2": -solution.m / 2.0})
            target = np.zeros((2, 2))
            slopes = params.b1 + (params.b2 - params.b1) * (np.arange(rays) + 0.5) / rays
            samples = [field.matrix_xy(xs, np.full_like(xs, s)) for s in slopes]
        else:
            beta = params.a1
            apex = (2.0 * beta, beta**2)
            target = 2.0 / params.c[0] * np.array([[1.0, beta], [beta, beta**2]])
            base = min(1.0 - beta, beta + 1.0) * radii
            angles = np.pi * (np.arange(rays) + 0.5) / (2 * rays)
            samples = [
                field.matrix_xy(beta + base * np.cos(theta), beta - base * np.sin(theta)) for theta in angles
            ]

        ray_limits = []
        drift = 0.0
        for values in samples:
            limit, change = self._richardson(values)
            ray_limits.append(limit)
            drift = max(drift, change)
        stacked = np.array(ray_limits)
        bounded = bool(np.all(np.isfinite(stacked)))
        spread = float(np.max(np.ptp(stacked, axis=0)))
        mean_limit = stacked.mean(axis=0)
        consistency = float(np.max(np.abs(mean_limit - target)))
        for (i, j), name in (((0, 0), "H11"), ((0, 1), "H12"), ((1, 1), "H22")):
            limits[name] = float(mean_limit[i, j])
            expected[name] = float(target[i, j])

        scale = 1.0 + float(np.max(np.abs(target)))
        passed = bool(bounded and spread <= tol * scale and consistency <= tol * scale)
        if solution.case == QuadClass.CALABI_TRIANGLE:
            passed = passed and bool(abs(limits["A_over_x2"] - expected["A_over_x2"]) <= tol * (1.0 + abs(solution.m)))
            passed = passed and bool(abs(limits["A_over_x"]) <= tol * (1.0 + abs(solution.m)))
        if drift > tol * scale:
            logger.info("Extrapolación en el ápice con deriva %.3g", drift)
        return ApexDiagnostics(
            apex=apex,
            limits=limits,
            expected=expected,
            ray_spread=spread,
            consistency_error=consistency,
            bounded=bounded,
            passed=passed,
        )
