import logging
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.integrate import dblquad
from scipy.linalg import null_space
from scipy.optimize import brentq

from models.errors import (
    DegenerateShapeError,
    InvalidInputError,
    NoSignChangeError,
    NoSolutionForAnsatzError,
    NotMonotoneError,
    ToricSolitonError,
    UnsupportedError,
)
from models.expquad_engine import BivariatePoly, ExpQuadEngine, Poly
from models.polytope_engine import PolytopeEngine
from models.schemas import (
    AffineMap2,
    CanonicalParameters,
    Classification,
    LabelledPolytope,
    NormalCone,
    QuadClass,
    SolitonSolution,
    SolitonStatus,
)
from models.settings import SolverSettings, get_settings

logger = logging.getLogger(__name__)

# Signos de (1/C_α₁, 1/C_α₂, 1/C_β₁, 1/C_β₂)
LABEL_SIGNS = np.array([1.0, -1.0, -1.0, 1.0])


class SolitonSolver:
    """Solitones de Kähler-Ricci generalizados con los ansatz producto, Calabi y ortotórico"""

    def __init__(
        self,
        settings: Optional[SolverSettings] = None,
        quad: Optional[ExpQuadEngine] = None,
        polytopes: Optional[PolytopeEngine] = None,
    ):
        self.settings = settings or get_settings()
        self.quad = quad or ExpQuadEngine(self.settings)
        self.polytopes = polytopes or PolytopeEngine(self.settings)

    # ------------------------------------------------------------------
    # Curvatura escalar promedio y núcleos
    # ------------------------------------------------------------------

    def average_scalar(self, params: CanonicalParameters) -> Tuple[float, float]:
        """(Scal̄, m) en forma cerrada"""
        a1, a2, b1, b2 = params.a1, params.a2, params.b1, params.b2
        ia1, ia2, ib1, ib2 = params.inverse_labels()
        if params.case == QuadClass.PARALLELOGRAM:
            m = -2.0 * (ib1 - ib2) / (b2 - b1)
            return 2.0 * (ia1 - ia2) / (a2 - a1) + m, m
        bracket = (ia1 - ia2) / (a2 - a1) - (ib1 - ib2) / (b2 - b1)
        if params.case.is_calabi:
            return 4.0 * bracket / (a1 + a2), 2.0 * (ib1 - ib2) / (b2 - b1)
        width = a1 + a2 - b1 - b2
        m = 2.0 * ((a2**2 - a1**2) * (ib2 - ib1) - (b2**2 - b1**2) * (ia2 - ia1)) / ((a2 - a1) * (b2 - b1) * width)
        return 4.0 * bracket / width, m

    def kernels(self, params: CanonicalParameters) -> Tuple[Poly, Poly]:
        """Núcleos (f_A, f_B) con A' - 2aA = f_A y B' - 2aB = f_B"""
        a1, a2, b1, b2 = params.a1, params.a2, params.b1, params.b2
        ia1, ia2, ib1, ib2 = params.inverse_labels()
        scal, m = self.average_scalar(params)
        if params.case == QuadClass.PARALLELOGRAM:
            slope_a = -(2 * ia1 - 2 * ia2) / (a2 - a1)
            slope_b = (2 * ib1 - 2 * ib2) / (b2 - b1)
            return Poly.of(2 * ia1 - slope_a * a1, slope_a), Poly.of(-2 * ib1 - slope_b * b1, slope_b)
        if params.case.is_calabi:
            constant = self.calabi_constant(params)
            return Poly.of(constant, -m, -scal / 2), Poly.of(-m * (b1 + b2) / 2, m)
        f_a = Poly.of(scal * a1**2 / 2 - m * a1 + 2 * ia1, m, -scal / 2)
        f_b = Poly.of(-scal * b1**2 / 2 + m * b1 - 2 * ib1, -m, scal / 2)
        return f_a, f_b

    def calabi_constant(self, params: CanonicalParameters) -> float:
        """Constante C del núcleo de Calabi (nula en el triángulo)"""
        if params.case == QuadClass.CALABI_TRIANGLE:
            return 0.0
        scal, m = self.average_scalar(params)
        return 2.0 * params.inverse_labels()[0] + scal * params.a1**2 / 2 + m * params.a1

    # ------------------------------------------------------------------
    # Resolución
    # ------------------------------------------------------------------

    def solve(self, params: CanonicalParameters) -> SolitonSolution:
        if params.case == QuadClass.PARALLELOGRAM:
            return self.solve_product(params)
        if params.case.is_calabi:
            return self.solve_calabi(params)
        return self.solve_orthotoric(params)

    def solve_product(self, params: CanonicalParameters) -> SolitonSolution:
        if params.case != QuadClass.PARALLELOGRAM:
            raise UnsupportedError("el ansatz producto requiere un paralelogramo")
        scal, m = self.average_scalar(params)
        f_a, f_b = self.kernels(params)
        rate_a = self.quad.unique_rate_root(f_a, params.a1, params.a2)
        rate_b = self.quad.unique_rate_root(f_b, params.b1, params.b2)
        monotone, point = self.polytopes.monotone_check(params)
        return SolitonSolution(
            case=params.case,
            params=params,
            a=(rate_a, rate_b),
            scal_bar=scal,
            m=m,
            profile_a=self.quad.profile_from_kernel(f_a, rate_a, params.a1),
            profile_b=self.quad.profile_from_kernel(f_b, rate_b, params.b1),
            status=SolitonStatus.SOLITON if monotone else SolitonStatus.GENERALIZED,
            rate_a=rate_a,
            rate_b=rate_b,
            monotone=monotone,
            preferred_point=point,
        )

    def solve_calabi(self, params: CanonicalParameters) -> SolitonSolution:
        if not params.case.is_calabi:
            raise UnsupportedError("el ansatz de Calabi requiere un trapecio o triángulo de Calabi")
        _, _, cb1, cb2 = params.c
        if abs(cb2 + cb1) > self.settings.ansatz_tol * max(abs(cb1), abs(cb2)):
            raise NoSolutionForAnsatzError(f"el ansatz de Calabi requiere C_β₂ = -C_β₁ (C_β₁ = {cb1}, C_β₂ = {cb2})")
        scal, m = self.average_scalar(params)
        f_a, f_b = self.kernels(params)
        rate = self.quad.unique_rate_root(f_a, params.a1, params.a2)
        monotone, point = self.polytopes.monotone_check(params)

        constant = self.calabi_constant(params)
        diagnostics: Dict[str, float] = {
            "c_at_alpha2": 2.0 * params.inverse_labels()[1] + scal * params.a2**2 / 2 + m * params.a2,
        }
        if params.case == QuadClass.CALABI_TRIANGLE:
            diagnostics["triangle_scal_bar"] = -4.0 / params.c[1] + 8.0 / params.c[3]
        return SolitonSolution(
            case=params.case,
            params=params,
            a=(rate, 0.0),
            scal_bar=scal,
            m=m,
            c_const=constant,
            profile_a=self.quad.profile_from_kernel(f_a, rate, params.a1),
            profile_b=self.quad.profile_from_kernel(f_b, 0.0, params.b1),
            status=SolitonStatus.SOLITON if monotone else SolitonStatus.GENERALIZED,
            rate_a=rate,
            monotone=monotone,
            preferred_point=point,
            diagnostics=diagnostics,
        )

    def solve_orthotoric(self, params: CanonicalParameters) -> SolitonSolution:
        if not params.case.is_orthotoric:
            raise UnsupportedError("el ansatz ortotórico requiere un cuadrilátero genérico o un símplice")
        scal, m = self.average_scalar(params)
        f_a, f_b = self.kernels(params)
        rate_a, rate_b = self.orthotoric_rates(params)
        agree = abs(rate_a - rate_b) <= self.settings.rate_agreement_tol * (1.0 + abs(rate_a))
        monotone, point = self.polytopes.monotone_check(params)
        if agree:
            status = SolitonStatus.SOLITON if monotone else SolitonStatus.GENERALIZED
            rate = 0.5 * (rate_a + rate_b)
            rate_a_profile = rate_b_profile = rate
        else:
            logger.info("Tasas ortotóricas distintas: a_A = %.12g, a_B = %.12g", rate_a, rate_b)
            status = SolitonStatus.NO_ORTHOTORIC
            rate, rate_a_profile, rate_b_profile = rate_a, rate_a, rate_b
        return SolitonSolution(
            case=params.case,
            params=params,
            a=(rate, 0.0),
            scal_bar=scal,
            m=m,
            profile_a=self.quad.profile_from_kernel(f_a, rate_a_profile, params.a1),
            profile_b=self.quad.profile_from_kernel(f_b, rate_b_profile, params.b1),
            status=status,
            rate_a=rate_a,
            rate_b=rate_b,
            monotone=monotone,
            preferred_point=point,
        )

    def orthotoric_rates(self, params: CanonicalParameters) -> Tuple[float, float]:
        """(a_A, a_B): raíces de las ecuaciones en [α₁, α₂] y [β₁, β₂]"""
        f_a, f_b = self.kernels(params)
        return (
            self.quad.unique_rate_root(f_a, params.a1, params.a2),
            self.quad.unique_rate_root(f_b, params.b1, params.b2),
        )

    def solve_polytope(
        self, poly: LabelledPolytope, hint: Optional[QuadClass] = None
    ) -> Tuple[Classification, CanonicalParameters, AffineMap2, SolitonSolution]:
        """Clasifica, normaliza y resuelve un polígono crudo"""
        classification = self.polytopes.classify_detailed(poly, hint)
        if classification.case == QuadClass.ORTHO_SIMPLEX:
            t, s = self.simplex_ratios_from_weights(classification.weights)
            beta = self.find_beta_for_simplex(t, s)
            params, phi = self.polytopes.normalize_simplex(poly, beta)
        else:
            params, phi = self.polytopes.normalize(poly, classification.case)
        return classification, params, phi, self.solve(params)

    # ------------------------------------------------------------------
    # Planos proyectivos con pesos
    # ------------------------------------------------------------------

    @staticmethod
    def simplex_ratios_from_weights(weights: Sequence[float]) -> Tuple[float, float]:
        """(t, s) = (k₂/k₁, k₂/k₃) con k₁ ≤ k₂ ≤ k₃"""
        k1, k2, k3 = sorted(float(w) for w in weights)
        return k2 / k1, k2 / k3

    @staticmethod
    def simplex_ratios(params: CanonicalParameters) -> Tuple[float, float]:
        _, ca2, cb1, cb2 = params.c
        t = cb1 * (params.b1 - params.a2) / ((params.a2 - params.b2) * cb2)
        s = ca2 * (params.b1 - params.a2) / ((params.b2 - params.b1) * cb2)
        return t, s

    @staticmethod
    def simplex_kernel(t: float, s: float, beta: float) -> Poly:
        """f_β(z) = -(s+t+st)z² + (s(1+β) + t(β-1))z + st + β(t-s)"""
        return Poly.of(s * t + beta * (t - s), s * (1 + beta) + t * (beta - 1), -(s + t + s * t))

    def simplex_sign_integrals(self, t: float, s: float, beta: float, a: float) -> Tuple[float, float]:
        """(∫_β^1 f_β e^{-2ax}, ∫_{-1}^β f_β e^{-2ay})"""
        kernel = self.simplex_kernel(t, s, beta)
        return (
            self.quad.integrate_poly_exp(kernel, a, beta, 1.0),
            self.quad.integrate_poly_exp(kernel, a, -1.0, beta),
        )

    def simplex_rates(self, t: float, s: float, beta: float) -> Tuple[float, float]:
        kernel = self.simplex_kernel(t, s, beta)
        return (
            self.quad.unique_rate_root(kernel, beta, 1.0),
            self.quad.unique_rate_root(kernel, -1.0, beta),
        )

    def find_beta_for_simplex(self, t: float, s: float) -> float:
        """β* ∈ (-1, 1) con a_A(β*) = a_B(β*)"""
        if t == 1.0 and s == 1.0:
            # Con pesos iguales a_A(β) = -a_B(-β): la diferencia es par en β y se anula en 0
            logger.warning("t = s = 1: pesos iguales, se toma β = 0")
            return 0.0
        if not (t > 1.0 and 0.0 < s < 1.0):
            raise InvalidInputError(f"se requiere t > 1 y s ∈ (0, 1); se recibió t = {t}, s = {s}")

        def gap(beta: float) -> float:
            rate_a, rate_b = self.simplex_rates(t, s, beta)
            return rate_a - rate_b

        count = self.settings.beta_scan_points
        grid = -1.0 + 2.0 * (np.arange(count) + 0.5) / count
        values = []
        for beta in grid:
            try:
                values.append(gap(float(beta)))
            except ToricSolitonError as exc:
                logger.debug("β = %.6f descartado: %s", beta, exc)
                values.append(np.nan)

        for j in range(count - 1):
            left, right = values[j], values[j + 1]
            if np.isnan(left) or np.isnan(right):
                continue
            if left == 0.0:
                return float(grid[j])
            if np.sign(left) != np.sign(right):
                return float(brentq(gap, grid[j], grid[j + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps))
        raise NoSignChangeError(f"a_A - a_B no cambia de signo en (-1, 1) para t = {t}, s = {s}")

    def simplex_parameters(self, t: float, s: float, beta: float) -> CanonicalParameters:
        """Símplice con C_β = 2/((1-β)t), de modo que C_{-1} = -1"""
        c_beta = 2.0 / ((1.0 - beta) * t)
        c_plus = -s * (beta + 1.0) / 2.0 * c_beta
        c_minus = t * (beta - 1.0) / 2.0 * c_beta
        return CanonicalParameters(
            case=QuadClass.ORTHO_SIMPLEX, alpha=(beta, 1.0), beta=(-1.0, beta), c=(c_beta, c_plus, c_minus, c_beta)
        )

    def solve_wpp_orthotoric(self, weights: Sequence[int]) -> SolitonSolution:
        """
        Solitón ortotórico del plano proyectivo pesado P(k₁,k₂,k₃).

        Los pesos se ordenan k₁ ≤ k₂ ≤ k₃ y se traducen a los parámetros del
        símplex (t, s) = (k₂/k₁, k₂/k₃) con simplex_ratios_from_weights; luego
        se busca β con find_beta_for_simplex y se resuelve en simplex_parameters(t, s, β).
        Los pesos (1,2,3) dan (t, s) = (2, 2/3). Con exactamente dos pesos
        iguales el caso es de Calabi y se rechaza.
        """
        k1, k2, k3 = sorted(weights)
        if (k1 == k2 or k2 == k3) and not k1 == k3:
            raise InvalidInputError("pesos con exactamente dos iguales: use el caso de Calabi")
        t, s = self.simplex_ratios_from_weights(weights)
        beta = self.find_beta_for_simplex(t, s)
        solution = self.solve_orthotoric(self.simplex_parameters(t, s, beta))
        sign_a, sign_b = self.simplex_sign_integrals(t, s, 0.0, 0.0)
        diagnostics = {"t": t, "s": s, "beta": beta, "g_a_origin": sign_a, "g_b_origin": sign_b}
        return solution.model_copy(update={"diagnostics": {**solution.diagnostics, **diagnostics}})

    def calabi_triangle_parameters(self, weights: Sequence[int]) -> CanonicalParameters:
        """Triángulo de Calabi con α₂ = 1, β = (0, 1) y pesos (l, k, k)"""
        values = [float(w) for w in weights]
        for i in range(3):
            others = [values[j] for j in range(3) if j != i]
            if others[0] == others[1]:
                l, k = values[i], others[0]
                break
        else:
            raise InvalidInputError("el triángulo de Calabi requiere dos pesos iguales")
        return CanonicalParameters(
            case=QuadClass.CALABI_TRIANGLE, alpha=(0.0, 1.0), beta=(0.0, 1.0), c=(None, -k / l, -1.0, 1.0)
        )

    def solve_wpp_calabi(self, weights: Sequence[int]) -> SolitonSolution:
        return self.solve_calabi(self.calabi_triangle_parameters(weights))

    @staticmethod
    def calabi_triangle_profile(solution: SolitonSolution, x):
        """Forma cerrada de A en el triángulo de Calabi"""
        x = np.asarray(x, dtype=float)
        scal, m = solution.scal_bar, solution.m
        a = solution.a[0]
        if abs(a) * solution.params.a2 < 1e-3:
            return -(scal * x**3 / 6 + m * x**2 / 2)
        growth = np.exp(2 * a * x)
        return scal / 2 * (x**2 / (2 * a) + x / (2 * a**2) + 1 / (4 * a**3) - growth / (4 * a**3)) + m * (
            x / (2 * a) + 1 / (4 * a**2) - growth / (4 * a**2)
        )

    # ------------------------------------------------------------------
    # Familias racionales
    # ------------------------------------------------------------------

    def family_parameters(self, r: float, k: float, l: float, p: float, beta: float) -> CanonicalParameters:
        """(1, α(β), 0, β, βl, -(β/α)k, (β-1)p, 1) con α = rβ/(β(r-1)+1)"""
        alpha = r * beta / (beta * (r - 1.0) + 1.0)
        try:
            return CanonicalParameters(
                case=QuadClass.GENERIC,
                alpha=(1.0, alpha),
                beta=(0.0, beta),
                c=(beta * l, -(beta / alpha) * k, (beta - 1.0) * p, 1.0),
            )
        except ValidationError as exc:
            raise InvalidInputError(f"β = {beta} fuera del dominio de la familia: {exc.errors()[0]['msg']}") from exc

    def family_gap(self, r: float, k: float, l: float, p: float, beta: float) -> float:
        rate_a, rate_b = self.orthotoric_rates(self.family_parameters(r, k, l, p, beta))
        return rate_a - rate_b

    def find_beta_for_family(self, r: float, k: float, l: float, p: float, bracket: Tuple[float, float]) -> float:
        lo, hi = sorted(bracket)
        gap_lo = self.family_gap(r, k, l, p, lo)
        gap_hi = self.family_gap(r, k, l, p, hi)
        if gap_lo == 0.0:
            return lo
        if gap_hi == 0.0:
            return hi
        if np.sign(gap_lo) == np.sign(gap_hi):
            raise NoSignChangeError(f"a_A - a_B no cambia de signo en [{lo}, {hi}]")
        beta = float(
            brentq(lambda b: self.family_gap(r, k, l, p, b), lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        )
        residual = abs(self.family_gap(r, k, l, p, beta))
        if residual > self.settings.family_tol:
            logger.warning("β* = %.15g deja |a_A - a_B| = %.3g", beta, residual)
        return beta

    def solve_family(
        self, r: float, k: float, l: float, p: float, bracket: Tuple[float, float]
    ) -> Tuple[float, SolitonSolution]:
        beta = self.find_beta_for_family(r, k, l, p, bracket)
        return beta, self.solve_orthotoric(self.family_parameters(r, k, l, p, beta))

    # ------------------------------------------------------------------
    # Condición del vector solitón
    # ------------------------------------------------------------------

    def soliton_vector_residual(self, params: CanonicalParameters, a: Tuple[float, float]) -> Tuple[float, float]:
        """Momentos ponderados ∫ e^{-2⟨a,μ⟩}(μ_i - μ_i(p)) dv normalizados por el volumen ponderado"""
        monotone, point = self.polytopes.monotone_check(params)
        if not monotone:
            raise NotMonotoneError("el vector solitón sólo está definido para polígonos monótonos")
        a1, a2 = float(a[0]), float(a[1])
        p1, p2 = point
        case = params.case
        if case != QuadClass.PARALLELOGRAM and a2 != 0.0:
            return self._soliton_vector_quadrature(params, (a1, a2), point)

        x_rate = a1
        y_rate = a2 if case == QuadClass.PARALLELOGRAM else (a1 if case.is_orthotoric else 0.0)
        mx, _ = self.quad.scaled_moments(2, x_rate, [params.a1], [params.a2])
        my, _ = self.quad.scaled_moments(2, y_rate, [params.b1], [params.b2])
        x0, x1, x2 = mx[:, 0]
        y0, y1, y2 = my[:, 0]

        if case == QuadClass.PARALLELOGRAM:
            return (x1 - p1 * x0) / x0, (y1 - p2 * y0) / y0
        if case.is_calabi:
            volume = x1 * y0
            return (x2 - p1 * x1) * y0 / volume, (x2 * y1 - p2 * x1 * y0) / volume
        volume = x1 * y0 - x0 * y1
        first = x2 * y0 - x0 * y2 - p1 * volume
        second = x2 * y1 - x1 * y2 - p2 * volume
        return first / volume, second / volume

    def _soliton_vector_quadrature(self, params, a, point):
        case = params.case

        def moment(x: float, y: float) -> Tuple[np.ndarray, float]:
            if case.is_calabi:
                mu, jac = np.array([x, x * y]), x
            else:
                mu, jac = np.array([x + y, x * y]), x - y
            return mu, jac * np.exp(-2.0 * (a[0] * mu[0] + a[1] * mu[1]))

        def integrate(func) -> float:
            value, _ = dblquad(
                lambda y, x: func(*moment(x, y)), params.a1, params.a2, params.b1, params.b2, epsabs=1e-13, epsrel=1e-12
            )
            return value

        volume = integrate(lambda mu, w: w)
        return (
            integrate(lambda mu, w: (mu[0] - point[0]) * w) / volume,
            integrate(lambda mu, w: (mu[1] - point[1]) * w) / volume,
        )

    # ------------------------------------------------------------------
    # Cono de etiquetas a tasa fija
    # ------------------------------------------------------------------

    @staticmethod
    def _shape_gradients(shape: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        a1, a2, b1, b2 = shape
        width = a1 + a2 - b1 - b2
        grad_scal = 4.0 / width * np.array([1 / (a2 - a1), -1 / (a2 - a1), -1 / (b2 - b1), 1 / (b2 - b1)])
        den = (a2 - a1) * (b2 - b1) * width
        sa, sb = a2**2 - a1**2, b2**2 - b1**2
        grad_m = 2.0 / den * np.array([sb, -sb, -sa, sa])
        return grad_scal, grad_m

    def normal_cone(self, shape: Sequence[float], a1: float) -> NormalCone:
        """Inversos de etiquetas w con a_A = a_B = a₁ para la forma (α₁, α₂, β₁, β₂)"""
        al1, al2, be1, be2 = (float(v) for v in shape)
        if not be1 < be2 < al1 < al2:
            raise InvalidInputError("la forma requiere β₁ < β₂ < α₁ < α₂")
        grad_scal, grad_m = self._shape_gradients(shape)

        ja, _ = self.quad.scaled_moments(2, a1, [al1], [al2])
        jb, _ = self.quad.scaled_moments(2, a1, [be1], [be2])
        ja0, ja1, ja2 = ja[:, 0]
        jb0, jb1, jb2 = jb[:, 0]
        row_a = -(ja2 - al1**2 * ja0) / 2 * grad_scal + (ja1 - al1 * ja0) * grad_m + 2 * ja0 * np.eye(4)[0]
        row_b = (jb2 - be1**2 * jb0) / 2 * grad_scal - (jb1 - be1 * jb0) * grad_m - 2 * jb0 * np.eye(4)[2]
        rows = np.vstack([row_a / np.linalg.norm(row_a), row_b / np.linalg.norm(row_b)])

        singular = np.linalg.svd(rows, compute_uv=False)
        if singular[-1] <= 1e-12 * singular[0]:
            raise DegenerateShapeError("el sistema lineal de la forma tiene rango deficiente")
        kernel = null_space(rows)

        monotone_form = np.array(
            [
                -(al2 - be1) * (al2 - be2) / (al2 - al1),
                (al1 - be1) * (al1 - be2) / (al2 - al1),
                -(al1 - be2) * (al2 - be2) / (be2 - be1),
                (al1 - be1) * (al2 - be1) / (be2 - be1),
            ]
        )
        rays = self._sign_cone_rays(kernel)
        monotone_ray = self._monotone_ray(kernel, monotone_form)
        return NormalCone(
            shape=(al1, al2, be1, be2),
            a1=float(a1),
            rows=tuple(tuple(map(float, r)) for r in rows),
            kernel=tuple(tuple(map(float, c)) for c in kernel.T),
            rays=[tuple(map(float, r)) for r in rays],
            monotone_ray=None if monotone_ray is None else tuple(map(float, monotone_ray)),
            monotone_form=tuple(map(float, monotone_form)),
        )

    @staticmethod
    def _feasible(w: np.ndarray, strict: bool) -> bool:
        signed = LABEL_SIGNS * w
        return bool(np.all(signed > 0)) if strict else bool(np.all(signed >= -1e-12))

    def _sign_cone_rays(self, kernel: np.ndarray):
        """Rayos extremos del cono de signos dentro del núcleo bidimensional"""
        candidates = []
        for row in kernel:
            direction = np.array([-row[1], row[0]])
            if np.linalg.norm(direction) == 0.0:
                continue
            for z in (direction, -direction):
                z = z / np.linalg.norm(z)
                if self._feasible(kernel @ z, strict=False):
                    candidates.append(z)
        best, widest = None, -1.0
        for i in range(len(candidates)):
            for j in range(i + 1, len(candidates)):
                cosine = float(candidates[i] @ candidates[j])
                if cosine > -1.0 + 1e-12 and 1.0 - cosine > widest:
                    best, widest = (candidates[i], candidates[j]), 1.0 - cosine
        if best is None:
            return []
        middle = best[0] + best[1]
        if np.linalg.norm(middle) == 0.0 or not self._feasible(kernel @ middle, strict=True):
            return []
        return [kernel @ z / np.linalg.norm(kernel @ z) for z in best]

    def _monotone_ray(self, kernel: np.ndarray, form: np.ndarray) -> Optional[np.ndarray]:
        projected = kernel.T @ form
        if np.linalg.norm(projected) <= 1e-14 * np.linalg.norm(form):
            return None
        z = np.array([-projected[1], projected[0]])
        for candidate in (z, -z):
            w = kernel @ candidate
            if self._feasible(w, strict=True):
                return w / np.linalg.norm(w)
        return None

    @staticmethod
    def cone_parameters(shape: Sequence[float], inverse_labels: Sequence[float]) -> CanonicalParameters:
        al1, al2, be1, be2 = (float(v) for v in shape)
        c = tuple(1.0 / float(w) for w in inverse_labels)
        try:
            return CanonicalParameters(case=QuadClass.GENERIC, alpha=(al1, al2), beta=(be1, be2), c=c)
        except ValidationError as exc:
            raise InvalidInputError(f"etiquetas fuera del cono de signos: {exc.errors()[0]['msg']}") from exc

    # ------------------------------------------------------------------
    # Identidades F_A, F_B y criterio de curvatura constante
    # ------------------------------------------------------------------

    def fafb_bivariate(self, params: CanonicalParameters) -> Tuple[BivariatePoly, BivariatePoly, BivariatePoly]:
        """F_A(x,a), F_B(x,a) y F_A - F_B (de grado cero en x)"""
        if not params.case.is_orthotoric:
            raise UnsupportedError("F_A y F_B sólo se definen en el caso ortotórico")
        scal, m = self.average_scalar(params)
        f_a, f_b = self.kernels(params)

        def build(kernel: Poly, sign: float) -> BivariatePoly:
            coeffs = np.zeros((3, 3))
            coeffs[0, 0] = scal / 8
            coeffs[1, 1] = scal / 4
            coeffs[0, 1] = -m / 4
            values = np.zeros(3)
            values[: kernel.array.size] = kernel.array
            coeffs[:, 2] = sign * values / 2
            return BivariatePoly(coeffs)

        first, second = build(f_a, -1.0), build(f_b, 1.0)
        return first, second, first - second

    def csc_condition(self, params: CanonicalParameters) -> Dict[str, Any]:
        """Valores de Scal̄ que anulan a_A y a_B"""
        if not params.case.is_orthotoric:
            raise UnsupportedError("el criterio sólo se define en el caso ortotórico")
        scal, _ = self.average_scalar(params)
        ia1, ia2, ib1, ib2 = params.inverse_labels()
        scal_a = -12.0 / (params.a2 - params.a1) ** 2 * (ia1 + ia2)
        scal_b = -12.0 / (params.b2 - params.b1) ** 2 * (ib1 + ib2)
        tol = 1e-10 * max(1.0, abs(scal))
        return {
            "scal_bar": float(scal),
            "scal_for_zero_rate_a": float(scal_a),
            "scal_for_zero_rate_b": float(scal_b),
            "rate_a_zero": bool(abs(scal - scal_a) <= tol),
            "rate_b_zero": bool(abs(scal - scal_b) <= tol),
        }
