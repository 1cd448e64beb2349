import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.linalg import null_space

from models.errors import ClassificationMismatchError, InvalidInputError, UnsupportedError
from models.schemas import (
    AffineFunction,
    AffineMap2,
    CanonicalParameters,
    Classification,
    Facet,
    LabelledPolytope,
    MonotoneResult,
    QuadClass,
    RationalApproximation,
    RationalityReport,
    RawPolytopeInput,
)
from models.settings import SolverSettings, get_settings

logger = logging.getLogger(__name__)


def _cross(u: np.ndarray, v: np.ndarray) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _map_from_points(source: Sequence[np.ndarray], target: Sequence[np.ndarray]) -> AffineMap2:
    """Mapa afín que envía tres puntos en otros tres"""
    src = np.column_stack([source[1] - source[0], source[2] - source[0]])
    dst = np.column_stack([target[1] - target[0], target[2] - target[0]])
    matrix = dst @ np.linalg.inv(src)
    return AffineMap2.from_arrays(matrix, target[0] - matrix @ source[0])


class PolytopeEngine:
    """Clasificación, normalización afín y diagnósticos de cuadriláteros y triángulos etiquetados"""

    def __init__(self, settings: Optional[SolverSettings] = None):
        self.settings = settings or get_settings()

    # ------------------------------------------------------------------
    # Construcción y validación
    # ------------------------------------------------------------------

    def build_polytope(self, vertices, normals, names: Optional[Sequence[str]] = None) -> LabelledPolytope:
        """Valida y ordena en sentido antihorario; la normal k corresponde a la arista k → k+1"""
        pts = np.asarray(vertices, dtype=float)
        nrm = np.asarray(normals, dtype=float)
        n = len(pts)
        if n not in (3, 4):
            raise InvalidInputError(f"se esperan 3 o 4 vértices, se recibieron {n}")
        if nrm.shape != (n, 2):
            raise InvalidInputError("se requiere una normal por arista")
        names = list(names) if names is not None else [None] * n

        if self._signed_area(pts) < 0:
            order = [(n - 2 - k) % n for k in range(n)]
            pts = pts[::-1].copy()
            nrm = nrm[order]
            names = [names[k] for k in order]

        scale = float(np.max(np.ptp(pts, axis=0)))
        if scale == 0.0 or abs(self._signed_area(pts)) <= 1e-12 * scale**2:
            raise InvalidInputError("polígono de área nula")
        for k in range(n):
            turn = _cross(pts[(k + 1) % n] - pts[k], pts[(k + 2) % n] - pts[(k + 1) % n])
            if turn <= 1e-12 * scale**2:
                raise InvalidInputError(f"polígono no estrictamente convexo en el vértice {(k + 1) % n}")

        centroid = pts.mean(axis=0)
        facets = []
        for k in range(n):
            u = nrm[k]
            norm_u = float(np.hypot(*u))
            if norm_u == 0.0:
                raise InvalidInputError(f"normal nula en la arista {k}")
            start, end = pts[k], pts[(k + 1) % n]
            offset = -float(u @ start)
            if abs(float(u @ end) + offset) > 1e-9 * norm_u * scale:
                raise InvalidInputError(f"la normal {k} no es perpendicular a su arista")
            if float(u @ centroid) + offset <= 0:
                raise InvalidInputError(f"la normal {k} no apunta hacia el interior")
            facets.append(Facet(normal=(float(u[0]), float(u[1])), offset=offset, name=names[k]))
        return LabelledPolytope(vertices=tuple(tuple(map(float, p)) for p in pts), facets=tuple(facets))

    def from_input(self, raw: RawPolytopeInput) -> LabelledPolytope:
        return self.build_polytope(raw.vertices, raw.normals)

    def _reoriented(self, poly: LabelledPolytope) -> LabelledPolytope:
        """Reordena en sentido antihorario tras un mapa que invierte la orientación"""
        normals = [f.normal for f in poly.facets]
        return self.build_polytope(poly.vertices, normals, [f.name for f in poly.facets])

    @staticmethod
    def _signed_area(pts: np.ndarray) -> float:
        x, y = pts[:, 0], pts[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    # ------------------------------------------------------------------
    # Clasificación
    # ------------------------------------------------------------------

    def triangle_weights(self, poly: LabelledPolytope) -> np.ndarray:
        """Pesos positivos k con Σ k_i u_i = 0, normalizados con mínimo 1"""
        if poly.size != 3:
            raise UnsupportedError("los pesos sólo están definidos para triángulos")
        normals = np.array([f.normal for f in poly.facets]).T
        kernel = null_space(normals)
        if kernel.shape[1] != 1:
            raise InvalidInputError("normales del triángulo degeneradas")
        weights = kernel[:, 0]
        weights = weights if weights.sum() > 0 else -weights
        if np.any(weights <= 0):
            raise InvalidInputError("los pesos del triángulo no son positivos")
        return weights / weights.min()

    def classify_detailed(self, poly: LabelledPolytope, hint: Optional[QuadClass] = None) -> Classification:
        if poly.size == 3:
            weights = self.triangle_weights(poly)
            if hint is not None:
                if not hint.is_triangle:
                    raise InvalidInputError(f"indicación {hint.value} inválida para un triángulo")
                case = hint
            else:
                close = [
                    abs(weights[i] - weights[j]) <= 1e-9 * max(weights[i], weights[j])
                    for i, j in ((0, 1), (1, 2), (0, 2))
                ]
                case = QuadClass.CALABI_TRIANGLE if any(close) else QuadClass.ORTHO_SIMPLEX
            return Classification(case=case, weights=tuple(float(w) for w in weights))

        pts = poly.vertex_array()
        edges = [pts[(k + 1) % 4] - pts[k] for k in range(4)]
        units = [e / np.hypot(*e) for e in edges]
        pairs, near = 0, False
        for k in (0, 1):
            deviation = abs(_cross(units[k], units[k + 2]))
            if deviation <= self.settings.parallel_tol:
                pairs += 1
                near = near or deviation > 0.0
        if near:
            logger.warning("Cuadrilátero casi degenerado: se usa la clase con más pares paralelos")
        case = {2: QuadClass.PARALLELOGRAM, 1: QuadClass.TRAPEZOID, 0: QuadClass.GENERIC}[pairs]
        return Classification(case=case, parallel_pairs=pairs, near_degenerate=near)

    def classify(self, poly: LabelledPolytope, hint: Optional[QuadClass] = None) -> QuadClass:
        return self.classify_detailed(poly, hint).case

    # ------------------------------------------------------------------
    # Normalización
    # ------------------------------------------------------------------

    def normalize(
        self, poly: LabelledPolytope, case: Optional[QuadClass] = None
    ) -> Tuple[CanonicalParameters, AffineMap2]:
        """Parámetros canónicos y el mapa Φ (entrada → modelo canónico)"""
        case = case or self.classify(poly)
        if case.is_triangle != (poly.size == 3):
            raise ClassificationMismatchError(f"{case.value} no corresponde a un polígono de {poly.size} lados")
        if case == QuadClass.PARALLELOGRAM:
            phi = self._parallelogram_map(poly)
        elif case == QuadClass.TRAPEZOID:
            phi = self._trapezoid_map(poly)
        elif case == QuadClass.GENERIC:
            phi = self._generic_map(poly)
        elif case == QuadClass.CALABI_TRIANGLE:
            phi = self._calabi_triangle_map(poly)
        else:
            return self.normalize_simplex(poly, 0.0)

        pushed = self._reoriented(phi.push_polytope(poly))
        params = self._read_parameters(case, pushed)
        self._check_match(params, pushed)
        return params, phi

    def normalize_simplex(self, poly: LabelledPolytope, beta: float) -> Tuple[CanonicalParameters, AffineMap2]:
        """Normalización del triángulo como símplice ortotórico con parámetro β ∈ (-1, 1)"""
        if not -1.0 < beta < 1.0:
            raise InvalidInputError(f"β = {beta} fuera de (-1, 1)")
        weights = self.triangle_weights(poly)
        smallest, middle, largest = (int(i) for i in np.argsort(weights, kind="stable"))
        pts = poly.vertex_array()
        source = [pts[(middle + 2) % 3], pts[(largest + 2) % 3], pts[(smallest + 2) % 3]]
        target = [np.array([0.0, -1.0]), np.array([beta - 1.0, -beta]), np.array([1.0 + beta, beta])]
        phi = _map_from_points(source, target)
        pushed = self._reoriented(phi.push_polytope(poly))

        labels = {}
        for facet in pushed.facets:
            gamma, label = self._tangent_label(facet)
            labels[gamma] = label
        gammas = sorted(labels)
        if not np.allclose(gammas, [-1.0, beta, 1.0], atol=1e-8):
            raise ClassificationMismatchError("las facetas no son tangentes a la parábola en γ = -1, β, 1")
        c_beta = labels[gammas[1]]
        params = self._build_params(
            QuadClass.ORTHO_SIMPLEX, (beta, 1.0), (-1.0, beta), (c_beta, labels[gammas[2]], labels[gammas[0]], c_beta)
        )
        self._check_match(params, pushed)
        return params, phi

    def _parallelogram_map(self, poly: LabelledPolytope) -> AffineMap2:
        pts = poly.vertex_array()
        start = min(range(4), key=lambda k: (pts[k][1], pts[k][0]))
        origin = pts[start]
        d1 = pts[(start + 1) % 4] - origin
        d2 = pts[(start - 1) % 4] - origin
        matrix = np.diag([np.hypot(*d1), np.hypot(*d2)]) @ np.linalg.inv(np.column_stack([d1, d2]))
        return AffineMap2.from_arrays(matrix, origin - matrix @ origin)

    def _trapezoid_map(self, poly: LabelledPolytope) -> AffineMap2:
        pts = poly.vertex_array()
        edges = [pts[(k + 1) % 4] - pts[k] for k in range(4)]
        units = [e / np.hypot(*e) for e in edges]
        parallel = [k for k in (0, 1) if abs(_cross(units[k], units[k + 2])) <= self.settings.parallel_tol]
        if len(parallel) != 1:
            raise ClassificationMismatchError("un trapecio requiere exactamente un par de lados paralelos")
        i = parallel[0]
        j = i + 1
        # Ápice: intersección de las rectas de los lados no paralelos
        system = np.column_stack([edges[j], -edges[(j + 2) % 4]])
        s, _ = np.linalg.solve(system, pts[(j + 2) % 4] - pts[j])
        apex = pts[j] + s * edges[j]

        d = units[i]
        rotation = np.array([[d[1], -d[0]], [d[0], d[1]]])
        if (rotation @ (pts.mean(axis=0) - apex))[0] < 0:
            rotation = -rotation
        rotated = (pts - apex) @ rotation.T
        slope_min = float(np.min(rotated[:, 1] / rotated[:, 0]))
        shear = np.eye(2)
        if slope_min < 0:
            shear[1, 0] = -slope_min
        matrix = shear @ rotation
        return AffineMap2.from_arrays(matrix, -matrix @ apex)

    def _generic_map(self, poly: LabelledPolytope) -> AffineMap2:
        """Mapa a la parábola μ₂ = μ₁²/4 vía la cónica dual tangente a las cuatro rectas"""
        rows = []
        for facet in poly.facets:
            line = np.array([facet.normal[0], facet.normal[1], facet.offset])
            a, b, c = line / np.linalg.norm(line)
            rows.append([a * a, 2 * a * b, b * b, 2 * a * c, 2 * b * c, c * c])
        # La recta del infinito es tangente: cónica de tipo parábola
        rows.append([0.0, 0.0, 0.0, 0.0, 0.0, 1.0])
        kernel = null_space(np.array(rows))
        if kernel.shape[1] != 1:
            raise ClassificationMismatchError("la cónica dual no es única")
        d11, d12, d22, d13, d23, _ = kernel[:, 0]
        quad = np.array([[d11, d12], [d12, d22]])
        e = np.array([d13, d23])
        if np.hypot(*e) <= 1e-14:
            raise ClassificationMismatchError("cónica dual degenerada")

        for sign in (1.0, -1.0):
            lam = sign * 2.0 * np.hypot(*e)
            n2 = -2.0 * e / lam
            n1 = np.array([n2[1], -n2[0]])
            frame = np.column_stack([n1, n2])
            k = frame.T @ quad @ frame / lam
            if k[0, 0] > 0:
                break
        else:
            raise ClassificationMismatchError("la cónica dual no es una parábola real")

        kappa = float(np.sqrt(k[0, 0]))
        tau1, tau2 = -2.0 * k[0, 1], -k[1, 1]
        matrix = np.column_stack([kappa * n1, n2])
        shift = tau1 * n1 + tau2 * n2
        return AffineMap2.from_arrays(matrix, shift).inverse()

    def _calabi_triangle_map(self, poly: LabelledPolytope) -> AffineMap2:
        weights = self.triangle_weights(poly)
        pairs = [(i, j) for i, j in ((0, 1), (1, 2), (0, 2)) if abs(weights[i] - weights[j]) <= 1e-9 * weights.max()]
        if not pairs:
            raise ClassificationMismatchError("el triángulo de Calabi requiere dos pesos iguales")
        i, j = pairs[0]
        distinct = 3 - i - j
        pts = poly.vertex_array()
        source = [pts[(distinct + 2) % 3], pts[distinct], pts[(distinct + 1) % 3]]
        target = [np.zeros(2), np.array([1.0, 0.0]), np.array([1.0, 1.0])]
        return _map_from_points(source, target)

    # ------------------------------------------------------------------
    # Lectura de parámetros del polígono transportado
    # ------------------------------------------------------------------

    def _read_parameters(self, case: QuadClass, pushed: LabelledPolytope) -> CanonicalParameters:
        tol = 1e-8
        alpha: Dict[str, Tuple[float, float]] = {}
        beta: Dict[str, Tuple[float, float]] = {}
        for facet in pushed.facets:
            u1, u2 = facet.normal
            size = facet.norm
            if case == QuadClass.PARALLELOGRAM:
                if abs(u2) <= tol * size:
                    alpha["1" if u1 > 0 else "2"] = (-facet.offset / u1, u1)
                elif abs(u1) <= tol * size:
                    label = -u2
                    beta["1" if label < 0 else "2"] = (facet.offset / label, label)
                else:
                    raise ClassificationMismatchError("faceta no alineada con los ejes")
            elif case.is_calabi:
                if abs(u2) <= tol * size:
                    position = -facet.offset / u1
                    alpha["1" if u1 > 0 else "2"] = (position, u1 / position)
                elif abs(facet.offset) <= tol * size * max(1.0, pushed.scale):
                    label = -u2
                    slope = -u1 / u2
                    # β₁ = 0 tras el corte, salvo redondeo
                    slope = 0.0 if abs(slope) <= 1e-12 else slope
                    beta["1" if label < 0 else "2"] = (slope, label)
                else:
                    raise ClassificationMismatchError("faceta que no pasa por el ápice ni es vertical")
            else:
                gamma, label = self._tangent_label(facet)
                beta[f"{gamma!r}"] = (gamma, label)

        if case == QuadClass.GENERIC:
            ordered = sorted(beta.values())
            if len(ordered) != 4:
                raise ClassificationMismatchError("se esperaban cuatro tangentes distintas")
            (b1, cb1), (b2, cb2), (a1, ca1), (a2, ca2) = ordered
            return self._build_params(case, (a1, a2), (b1, b2), (ca1, ca2, cb1, cb2))

        if case == QuadClass.CALABI_TRIANGLE:
            if set(alpha) != {"2"} or set(beta) != {"1", "2"}:
                raise ClassificationMismatchError("el triángulo no tiene la forma de Calabi")
            return self._build_params(
                case, (0.0, alpha["2"][0]), (beta["1"][0], beta["2"][0]), (None, alpha["2"][1], beta["1"][1], beta["2"][1])
            )
        if set(alpha) != {"1", "2"} or set(beta) != {"1", "2"}:
            raise ClassificationMismatchError(f"las facetas no tienen la forma {case.value}")
        return self._build_params(
            case,
            (alpha["1"][0], alpha["2"][0]),
            (beta["1"][0], beta["2"][0]),
            (alpha["1"][1], alpha["2"][1], beta["1"][1], beta["2"][1]),
        )

    @staticmethod
    def _tangent_label(facet: Facet) -> Tuple[float, float]:
        """(γ, C) de una faceta C(γ, -1)·μ - Cγ²"""
        u1, u2 = facet.normal
        if abs(u2) <= 1e-12 * facet.norm:
            raise ClassificationMismatchError("faceta vertical: no es tangente a la parábola")
        label = -u2
        gamma = u1 / label
        if abs(facet.offset + label * gamma**2) > 1e-7 * max(1.0, abs(label) * (1.0 + gamma**2)):
            raise ClassificationMismatchError("faceta no tangente a la parábola")
        return gamma, label

    @staticmethod
    def _build_params(case, alpha, beta, c) -> CanonicalParameters:
        try:
            return CanonicalParameters(case=case, alpha=alpha, beta=beta, c=c)
        except ValidationError as exc:
            raise ClassificationMismatchError(f"parámetros canónicos inválidos: {exc.errors()[0]['msg']}") from exc

    def _check_match(self, params: CanonicalParameters, pushed: LabelledPolytope) -> None:
        model = self.canonical_polytope(params)
        scale = max(1.0, pushed.scale)
        for vertex in model.vertex_array():
            if np.min(np.hypot(*(pushed.vertex_array() - vertex).T)) > 1e-7 * scale:
                raise ClassificationMismatchError("los vértices no coinciden con el modelo canónico")
        for facet in model.facets:
            line = np.array([*facet.normal, facet.offset])
            matches = [
                np.linalg.norm(line - np.array([*other.normal, other.offset])) <= 1e-7 * np.linalg.norm(line) * scale
                for other in pushed.facets
            ]
            if not any(matches):
                raise ClassificationMismatchError(f"la etiqueta {facet.name} no coincide con el modelo canónico")

    # ------------------------------------------------------------------
    # Modelo canónico
    # ------------------------------------------------------------------

    def canonical_polytope(self, params: CanonicalParameters) -> LabelledPolytope:
        a1, a2, b1, b2 = params.a1, params.a2, params.b1, params.b2
        ca1, ca2, cb1, cb2 = params.c
        case = params.case
        if case == QuadClass.PARALLELOGRAM:
            vertices = [(a1, b1), (a2, b1), (a2, b2), (a1, b2)]
            facets = [
                Facet(normal=(0.0, -cb1), offset=cb1 * b1, name="beta1"),
                Facet(normal=(ca2, 0.0), offset=-ca2 * a2, name="alpha2"),
                Facet(normal=(0.0, -cb2), offset=cb2 * b2, name="beta2"),
                Facet(normal=(ca1, 0.0), offset=-ca1 * a1, name="alpha1"),
            ]
        elif case.is_calabi:
            beta_facets = [
                Facet(normal=(cb1 * b1, -cb1), offset=0.0, name="beta1"),
                Facet(normal=(ca2 * a2, 0.0), offset=-ca2 * a2**2, name="alpha2"),
                Facet(normal=(cb2 * b2, -cb2), offset=0.0, name="beta2"),
            ]
            if case == QuadClass.CALABI_TRIANGLE:
                vertices = [(0.0, 0.0), (a2, a2 * b1), (a2, a2 * b2)]
                facets = beta_facets
            else:
                vertices = [(a1, a1 * b1), (a2, a2 * b1), (a2, a2 * b2), (a1, a1 * b2)]
                facets = beta_facets + [Facet(normal=(ca1 * a1, 0.0), offset=-ca1 * a1**2, name="alpha1")]
        else:

            def tangent(gamma: float, label: float, name: str) -> Facet:
                return Facet(normal=(label * gamma, -label), offset=-label * gamma**2, name=name)

            def sigma(x: float, y: float) -> Tuple[float, float]:
                return (x + y, x * y)

            if case == QuadClass.ORTHO_SIMPLEX:
                vertices = [sigma(a1, b1), sigma(a2, b1), sigma(a2, b2)]
                facets = [tangent(b1, cb1, "beta1"), tangent(a2, ca2, "alpha2"), tangent(b2, cb2, "beta2")]
            else:
                vertices = [sigma(a1, b1), sigma(a2, b1), sigma(a2, b2), sigma(a1, b2)]
                facets = [
                    tangent(b1, cb1, "beta1"),
                    tangent(a2, ca2, "alpha2"),
                    tangent(b2, cb2, "beta2"),
                    tangent(a1, ca1, "alpha1"),
                ]
        return LabelledPolytope(vertices=tuple(tuple(map(float, v)) for v in vertices), facets=tuple(facets))

    # ------------------------------------------------------------------
    # Condición monótona y equilibrio
    # ------------------------------------------------------------------

    def monotone_sides(self, params: CanonicalParameters) -> MonotoneResult:
        a1, a2, b1, b2 = params.a1, params.a2, params.b1, params.b2
        ia1, ia2, ib1, ib2 = params.inverse_labels()
        ca1, ca2, cb1, cb2 = params.c
        case = params.case

        if case.is_triangle:
            point, level = self.common_level_point(self.canonical_polytope(params))
            return MonotoneResult(lhs=level, rhs=level, point=tuple(point), level=level)

        if case == QuadClass.PARALLELOGRAM:
            lhs = (ia1 - ia2) / (a2 - a1)
            rhs = (ib2 - ib1) / (b2 - b1)
            x_o = (a1 * ca1 - a2 * ca2) / (ca1 - ca2)
            y_o = (b1 * cb1 - b2 * cb2) / (cb1 - cb2)
            point = (x_o, y_o)
        elif case == QuadClass.TRAPEZOID:
            lhs = (a2 * ia1 / a1 - a1 * ia2 / a2) / (a2 - a1)
            rhs = (ib2 - ib1) / (b2 - b1)
            x_o = (a1**2 * ca1 - a2**2 * ca2) / (a1 * ca1 - a2 * ca2)
            y_o = (b1 * cb1 - b2 * cb2) / (cb1 - cb2)
            point = (x_o, x_o * y_o)
        else:
            lhs = ((a1 - b1) * (a2 - b1) * ib2 - (a1 - b2) * (a2 - b2) * ib1) / (b2 - b1)
            rhs = ((a2 - b1) * (a2 - b2) * ia1 - (a1 - b1) * (a1 - b2) * ia2) / (a2 - a1)
            point = tuple(self.common_level_point(self.canonical_polytope(params))[0])

        result = MonotoneResult(lhs=lhs, rhs=rhs)
        if self._sides_agree(lhs, rhs):
            level = float(self.canonical_polytope(params).defining_values(point).mean())
            result = MonotoneResult(lhs=lhs, rhs=rhs, point=point, level=level)
        return result

    def monotone_check(self, params: CanonicalParameters) -> Tuple[bool, Optional[Tuple[float, float]]]:
        result = self.monotone_sides(params)
        return result.point is not None, result.point

    def _sides_agree(self, lhs: float, rhs: float) -> bool:
        return bool(abs(lhs - rhs) <= self.settings.monotone_rtol * max(abs(lhs), abs(rhs), 1e-300))

    @staticmethod
    def common_level_point(poly: LabelledPolytope) -> Tuple[np.ndarray, float]:
        """Punto p y nivel λ con L_k(p) = λ para todo k (mínimos cuadrados)"""
        system = np.array([[f.normal[0], f.normal[1], -1.0] for f in poly.facets])
        rhs = -np.array([f.offset for f in poly.facets])
        solution, *_ = np.linalg.lstsq(system, rhs, rcond=None)
        return solution[:2], float(solution[2])

    def equipoised_residual(self, f: AffineFunction, poly: LabelledPolytope) -> float:
        """f(s₁) - f(s₂) + f(s₃) - f(s₄) sobre los vértices en orden cíclico"""
        if poly.size != 4:
            raise UnsupportedError("el equilibrio sólo está definido para cuadriláteros")
        values = [f(v) for v in poly.vertices]
        return values[0] - values[1] + values[2] - values[3]

    # ------------------------------------------------------------------
    # Racionalidad
    # ------------------------------------------------------------------

    def nearest_rational(self, value: float) -> RationalApproximation:
        """Fracción más cercana y su desarrollo en fracción continua"""
        fraction = Fraction(value).limit_denominator(self.settings.rational_max_denominator)
        error = abs(value - float(fraction))
        terms: List[int] = []
        num, den = fraction.numerator, fraction.denominator
        while den:
            quotient, rest = divmod(num, den)
            terms.append(quotient)
            num, den = den, rest
        # Detección con denominador acotado
        detected = Fraction(value).limit_denominator(self.settings.rational_detect_denominator)
        tol = self.settings.rational_tol * max(1.0, abs(value))
        return RationalApproximation(
            value=value,
            fraction=f"{fraction.numerator}/{fraction.denominator}",
            error=error,
            rational=bool(abs(value - float(detected)) <= tol),
            continued_fraction=terms,
        )

    def rationality_values(self, params: CanonicalParameters) -> Dict[str, float]:
        a1, a2, b1, b2 = params.a1, params.a2, params.b1, params.b2
        ca1, ca2, cb1, cb2 = params.c
        case = params.case
        if case == QuadClass.PARALLELOGRAM:
            return {"p": -cb2 / cb1, "k": -ca2 / ca1}
        if case == QuadClass.TRAPEZOID:
            return {
                "p": -cb2 / cb1,
                "k": (b2 - b1) * cb2 / (a1 * ca1),
                "l": -(b2 - b1) * cb2 / (a2 * ca2),
            }
        if case == QuadClass.GENERIC:
            return {
                "r": (b2 - a1) * (a2 - b1) / ((b2 - b1) * (a2 - a1)),
                "p": (a1 - b1) * cb1 / ((b2 - a1) * cb2),
                "k": (b1 - a2) * ca2 / ((b2 - b1) * cb2),
                "l": (a1 - b1) * ca1 / ((b2 - b1) * cb2),
            }
        weights = self.triangle_weights(self.canonical_polytope(params))
        return {f"k{i + 1}": float(w) for i, w in enumerate(weights)}

    def rationality_parameters(self, params: CanonicalParameters) -> RationalityReport:
        values = self.rationality_values(params)
        approximations = {name: self.nearest_rational(v) for name, v in values.items()}
        residual = None
        if params.case == QuadClass.TRAPEZOID:
            residual = values["k"] * params.a2 + values["l"] * params.a1 - 2.0 * (params.a2 - params.a1)
        elif params.case == QuadClass.GENERIC:
            r, p, k, l = (values[name] for name in ("r", "p", "k", "l"))
            residual = (
                params.a2 * (1 + 1 / p - 1 / l)
                + params.b1 * ((1 - r) / l - 1 - 1 / k)
                + params.b2 * (r / k - 1 / p + r / l)
            )
        note = "pesos del triángulo normalizados" if params.case.is_triangle else None
        return RationalityReport(
            case=params.case,
            values=approximations,
            rational=all(item.rational for item in approximations.values()),
            monotone_residual=residual,
            note=note,
        )

    def delzant_check(self, params: CanonicalParameters) -> Tuple[bool, str]:
        tol = self.settings.rational_tol
        if params.case == QuadClass.PARALLELOGRAM:
            values = self.rationality_values(params)
            ok = abs(values["p"] - 1) <= tol and abs(values["k"] - 1) <= tol
            return bool(ok), f"p = {values['p']:.12g}, k = {values['k']:.12g}"
        if params.case == QuadClass.TRAPEZOID:
            values = self.rationality_values(params)
            p, k, l = values["p"], values["k"], values["l"]
            integer = round(k)
            ok = (
                abs(p - 1) <= tol
                and abs(k - l) <= tol * max(1.0, k)
                and integer >= 1
                and abs(k - integer) <= tol * max(1.0, k)
            )
            return bool(ok), f"p = {p:.12g}, k = {k:.12g}, l = {l:.12g}"
        return False, f"criterio de Delzant no implementado para {params.case.value}"

    # ------------------------------------------------------------------
    # Escalar promedio desde el borde
    # ------------------------------------------------------------------

    def boundary_average_scalar(self, poly: LabelledPolytope) -> float:
        """Scal̄ = 2 Σ_k (longitud_k / |u_k|) / área"""
        total = 0.0
        for k, facet in enumerate(poly.facets):
            start, end = poly.edge(k)
            total += float(np.hypot(*(end - start))) / facet.norm
        return 2.0 * total / abs(poly.signed_area)
