from enum import Enum
from fractions import Fraction
from typing import Annotated, Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator


def _parse_number(value: Any) -> Any:
    """Acepta racionales exactos "p/q" además de decimales"""
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"número inválido: {value!r}") from exc
    return value


Number = Annotated[float, BeforeValidator(_parse_number)]
Point = Tuple[Number, Number]


class QuadClass(str, Enum):
    """Tipo de polígono etiquetado"""
    PARALLELOGRAM = "Parallelogram"
    TRAPEZOID = "Trapezoid"
    GENERIC = "GenericQuadrilateral"
    CALABI_TRIANGLE = "CalabiTriangle"
    ORTHO_SIMPLEX = "OrthoSimplex"

    @property
    def is_triangle(self) -> bool:
        return self in (QuadClass.CALABI_TRIANGLE, QuadClass.ORTHO_SIMPLEX)

    @property
    def is_calabi(self) -> bool:
        return self in (QuadClass.TRAPEZOID, QuadClass.CALABI_TRIANGLE)

    @property
    def is_orthotoric(self) -> bool:
        return self in (QuadClass.GENERIC, QuadClass.ORTHO_SIMPLEX)


class SolitonStatus(str, Enum):
    """Resultado del ansatz"""
    SOLITON = "Soliton"
    GENERALIZED = "GeneralizedSoliton"
    NO_ORTHOTORIC = "NoOrthotoricSoliton"


class AffineFunction(BaseModel):
    """Función afín f(μ) = constante + ⟨lineal, μ⟩"""
    model_config = ConfigDict(frozen=True)

    constant: Number = 0.0
    linear: Point = (0.0, 0.0)

    def __call__(self, point) -> float:
        return self.constant + self.linear[0] * point[0] + self.linear[1] * point[1]


class Facet(BaseModel):
    """Faceta etiquetada: L(p) = ⟨p, normal⟩ + offset"""
    model_config = ConfigDict(frozen=True)

    normal: Point
    offset: Number
    name: Optional[str] = None

    def value(self, point) -> float:
        return self.normal[0] * point[0] + self.normal[1] * point[1] + self.offset

    @property
    def norm(self) -> float:
        return float(np.hypot(*self.normal))


class LabelledPolytope(BaseModel):
    """Polígono convexo simple con vértices en sentido antihorario; la faceta k une el vértice k con el k+1"""
    model_config = ConfigDict(frozen=True)

    vertices: Tuple[Point, ...]
    facets: Tuple[Facet, ...]

    @property
    def size(self) -> int:
        return len(self.vertices)

    def vertex_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    @property
    def centroid(self) -> np.ndarray:
        return self.vertex_array().mean(axis=0)

    @property
    def signed_area(self) -> float:
        pts = self.vertex_array()
        x, y = pts[:, 0], pts[:, 1]
        return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))

    @property
    def scale(self) -> float:
        pts = self.vertex_array()
        return float(np.max(np.ptp(pts, axis=0)))

    def defining_values(self, point) -> np.ndarray:
        return np.array([facet.value(point) for facet in self.facets])

    def boundary_distance(self, point) -> float:
        """Distancia euclídea mínima a las rectas de las facetas"""
        return float(min(facet.value(point) / facet.norm for facet in self.facets))

    def edge(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        pts = self.vertex_array()
        return pts[k], pts[(k + 1) % self.size]


class CanonicalParameters(BaseModel):
    """Parámetros canónicos (α₁, α₂, β₁, β₂, C_α₁, C_α₂, C_β₁, C_β₂) con su caso"""
    model_config = ConfigDict(frozen=True)

    case: QuadClass
    alpha: Point
    beta: Point
    # C_α₁ es None en el triángulo de Calabi
    c: Tuple[Optional[Number], Number, Number, Number]

    @model_validator(mode="after")
    def _check_invariants(self) -> "CanonicalParameters":
        a1, a2 = self.alpha
        b1, b2 = self.beta
        ca1, ca2, cb1, cb2 = self.c
        if not (a1 < a2 and b1 < b2):
            raise ValueError("se requiere α₁ < α₂ y β₁ < β₂")
        if ca2 >= 0 or cb1 >= 0 or cb2 <= 0:
            raise ValueError("patrón de signos inválido: C_α₂ < 0, C_β₁ < 0, C_β₂ > 0")
        if self.case == QuadClass.CALABI_TRIANGLE:
            if a1 != 0 or ca1 is not None:
                raise ValueError("el triángulo de Calabi usa α₁ = 0 y C_α₁ = null")
        elif ca1 is None or ca1 <= 0:
            raise ValueError("se requiere C_α₁ > 0")
        if self.case == QuadClass.TRAPEZOID and (a1 <= 0 or b1 < 0):
            raise ValueError("trapecio de Calabi: α₁ > 0 y β₁ ≥ 0")
        if self.case == QuadClass.CALABI_TRIANGLE and b1 < 0:
            raise ValueError("triángulo de Calabi: β₁ ≥ 0")
        if self.case == QuadClass.GENERIC and not b2 < a1:
            raise ValueError("parámetros ortotóricos: β₂ < α₁")
        if self.case == QuadClass.ORTHO_SIMPLEX and (b2 != a1 or ca1 != cb2):
            raise ValueError("símplice ortotórico: α₁ = β₂ y C_α₁ = C_β₂")
        return self

    @property
    def a1(self) -> float:
        return self.alpha[0]

    @property
    def a2(self) -> float:
        return self.alpha[1]

    @property
    def b1(self) -> float:
        return self.beta[0]

    @property
    def b2(self) -> float:
        return self.beta[1]

    def inverse_labels(self) -> np.ndarray:
        """(1/C_α₁, 1/C_α₂, 1/C_β₁, 1/C_β₂); 1/C_α₁ = 0 en el triángulo"""
        return np.array([0.0 if value is None else 1.0 / value for value in self.c])

    def rescaled(self, factor: float) -> "CanonicalParameters":
        return self.model_copy(update={"c": tuple(None if v is None else v * factor for v in self.c)})


class AffineMap2(BaseModel):
    """Mapa afín Φ(p) = M p + t"""
    model_config = ConfigDict(frozen=True)

    linear: Tuple[Point, Point]
    translation: Point

    @classmethod
    def from_arrays(cls, matrix: np.ndarray, translation: np.ndarray) -> "AffineMap2":
        return cls(
            linear=(tuple(map(float, matrix[0])), tuple(map(float, matrix[1]))),
            translation=tuple(map(float, translation)),
        )

    @classmethod
    def identity(cls) -> "AffineMap2":
        return cls.from_arrays(np.eye(2), np.zeros(2))

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.linear, dtype=float)

    @property
    def shift(self) -> np.ndarray:
        return np.asarray(self.translation, dtype=float)

    @property
    def determinant(self) -> float:
        return float(np.linalg.det(self.matrix))

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.matrix.T + self.shift

    def inverse(self) -> "AffineMap2":
        inv = np.linalg.inv(self.matrix)
        return AffineMap2.from_arrays(inv, -inv @ self.shift)

    def compose(self, inner: "AffineMap2") -> "AffineMap2":
        """self ∘ inner"""
        return AffineMap2.from_arrays(self.matrix @ inner.matrix, self.matrix @ inner.shift + self.shift)

    def push_facet(self, facet: Facet) -> Facet:
        """Faceta transportada: L' = L ∘ Φ⁻¹"""
        normal = np.linalg.solve(self.matrix.T, np.asarray(facet.normal, dtype=float))
        offset = facet.offset - float(normal @ self.shift)
        return Facet(normal=tuple(map(float, normal)), offset=offset, name=facet.name)

    def push_polytope(self, poly: LabelledPolytope) -> LabelledPolytope:
        vertices = tuple(tuple(map(float, v)) for v in self.apply(poly.vertices))
        return LabelledPolytope(vertices=vertices, facets=tuple(self.push_facet(f) for f in poly.facets))


class Classification(BaseModel):
    """Detalle de la clasificación"""
    case: QuadClass
    parallel_pairs: int = 0
    near_degenerate: bool = False
    weights: Optional[Tuple[float, ...]] = None


class MonotoneResult(BaseModel):
    """Condición monótona: ambos lados y punto preferido"""
    lhs: float
    rhs: float
    point: Optional[Point] = None
    level: Optional[float] = None


class RationalApproximation(BaseModel):
    """Aproximación racional por fracciones continuas"""
    value: float
    fraction: str
    error: float
    rational: bool
    continued_fraction: List[int] = Field(default_factory=list)


class RationalityReport(BaseModel):
    """Números (p,k) / (p,k,l) / (r,p,k,l) y su diagnóstico racional"""
    case: QuadClass
    values: Dict[str, RationalApproximation]
    rational: bool
    monotone_residual: Optional[float] = None
    note: Optional[str] = None


class NormalCone(BaseModel):
    """Cono de inversos de etiquetas (1/C_α₁, 1/C_α₂, 1/C_β₁, 1/C_β₂) que resuelven el sistema a a₁ fijo"""
    shape: Tuple[float, float, float, float]
    a1: float
    rows: Tuple[Tuple[float, float, float, float], Tuple[float, float, float, float]]
    kernel: Tuple[Tuple[float, float, float, float], Tuple[float, float, float, float]]
    rays: List[Tuple[float, float, float, float]] = Field(default_factory=list)
    monotone_ray: Optional[Tuple[float, float, float, float]] = None
    monotone_form: Tuple[float, float, float, float]

    @property
    def is_empty(self) -> bool:
        return len(self.rays) < 2

    def sample(self, theta: float) -> np.ndarray:
        """Punto interior (1-θ)·r₁ + θ·r₂ del cono de signos"""
        first, second = (np.asarray(r) for r in self.rays[:2])
        return (1.0 - theta) * first + theta * second


class SolitonSolution(BaseModel):
    """Solución: vector solitón, Scal̄, m, perfiles A y B"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    case: QuadClass
    params: CanonicalParameters
    a: Tuple[float, float]
    scal_bar: float
    m: float
    c_const: Optional[float] = None
    profile_a: Any
    profile_b: Any
    status: SolitonStatus
    rate_a: Optional[float] = None
    rate_b: Optional[float] = None
    monotone: bool = False
    preferred_point: Optional[Tuple[float, float]] = None
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @property
    def lambda_(self) -> float:
        return self.scal_bar / 4.0


class FacetCheck(BaseModel):
    """Condiciones de borde en una faceta"""
    name: str
    value_error: float
    derivative_error: float
    tangent_positive: bool


class ApexDiagnostics(BaseModel):
    """Suavidad en el vértice colapsado"""
    apex: Tuple[float, float]
    limits: Dict[str, float] = Field(default_factory=dict)
    expected: Dict[str, float] = Field(default_factory=dict)
    ray_spread: float = 0.0
    consistency_error: float = 0.0
    bounded: bool = True
    passed: bool = True


class ResidualReport(BaseModel):
    """Residuo de la ecuación del solitón y verificaciones independientes"""
    max_residual: float
    mean_residual: float
    grid_points: int
    skipped_points: int = 0
    step: Optional[float] = None
    positive_definite: bool = True
    boundary: List[FacetCheck] = Field(default_factory=list)
    profile_identity_error: float = 0.0
    profile_boundary_error: float = 0.0
    profiles_positive: bool = True
    apex: Optional[ApexDiagnostics] = None
    tolerance: float
    passed: bool
    samples: List[Tuple[float, float, float, float, float]] = Field(default_factory=list, exclude=True)


class ReebVector(BaseModel):
    """Función afín b(μ) = b₀ + b₁μ₁ + b₂μ₂"""
    model_config = ConfigDict(frozen=True)

    b0: Number
    b1: Number = 0.0
    b2: Number = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.b0, self.b1, self.b2], dtype=float)

    def value(self, point) -> float:
        return self.b0 + self.b1 * point[0] + self.b2 * point[1]


class CharacteristicPolytope(BaseModel):
    """Polítopo característico en una carta afín de {⟨y,b⟩ = 1/2}"""
    model_config = ConfigDict(frozen=True)

    polytope: LabelledPolytope
    reeb: ReebVector
    chart_index: int
    images: Tuple[Tuple[float, float, float], ...]
    facet_map: Tuple[int, ...]


class SasakiFamilyResult(BaseModel):
    """Miembro de la familia de S²×S³ para un vector de Reeb dado"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    reeb: ReebVector
    characteristic: CharacteristicPolytope
    classification: QuadClass
    params: CanonicalParameters
    affine_map: AffineMap2
    solution: SolitonSolution
    regularity: str
    lifted_vector: Tuple[float, float, float]
    equipoise_base: float
    equipoise_chart: float
    equipoised: bool
    residual: Optional[ResidualReport] = None


# Documentos de entrada


class RawPolytopeInput(BaseModel):
    """Polígono crudo: vértices y normales interiores"""
    vertices: List[Point]
    normals: List[Point]
    triangle_hint: Optional[QuadClass] = None


class WppInput(BaseModel):
    """Pesos (k₁, k₂, k₃) de un plano proyectivo con pesos"""
    weights: Tuple[int, int, int]

    @model_validator(mode="after")
    def _positive(self) -> "WppInput":
        if min(self.weights) <= 0:
            raise ValueError("los pesos deben ser enteros positivos")
        return self


class SasakiInput(BaseModel):
    """Vector de Reeb b = (b₀, 0, b₂) sobre el cuadrado de Delzant"""
    b0: Number
    b2: Number


class FamilyInput(BaseModel):
    """Familia racional (r, k, l, p) y el intervalo en β"""
    r: Number
    k: Number
    l: Number
    p: Number
    bracket: Tuple[Number, Number]


class ConeScanInput(BaseModel):
    """Forma ortotórica y tasa a₁ fija"""
    shape: Tuple[Number, Number, Number, Number]
    a1: Number
    samples: int = Field(default=5, ge=1)


class InputSpec(BaseModel):
    """Documento de entrada: exactamente una variante"""
    model_config = ConfigDict(extra="forbid")

    polytope: Optional[RawPolytopeInput] = None
    canonical: Optional[CanonicalParameters] = None
    wpp: Optional[WppInput] = None
    sasaki: Optional[SasakiInput] = None
    family: Optional[FamilyInput] = None
    cone_scan: Optional[ConeScanInput] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "InputSpec":
        present = [name for name in type(self).model_fields if getattr(self, name) is not None]
        if len(present) != 1:
            raise ValueError(f"se requiere exactamente una variante, se recibieron: {present or 'ninguna'}")
        return self

    @property
    def variant(self) -> str:
        return next(name for name in type(self).model_fields if getattr(self, name) is not None)


class ReportDocument(BaseModel):
    """Reporte legible por máquina"""
    command: str
    input: Dict[str, Any]
    classification: Optional[QuadClass] = None
    canonical: Optional[CanonicalParameters] = None
    affine_map: Optional[AffineMap2] = None
    scal_bar: Optional[float] = None
    m: Optional[float] = None
    lambda_: Optional[float] = Field(default=None, serialization_alias="lambda")
    a: Optional[Tuple[float, float]] = None
    status: Optional[SolitonStatus] = None
    rate_a: Optional[float] = None
    rate_b: Optional[float] = None
    monotone: Optional[bool] = None
    preferred_point: Optional[Tuple[float, float]] = None
    equipoised: Optional[bool] = None
    rationality: Optional[RationalityReport] = None
    delzant: Optional[bool] = None
    residual: Optional[ResidualReport] = None
    extra: Dict[str, Any] = Field(default_factory=dict)
    profiles: Dict[str, List[Tuple[float, float, float, float]]] = Field(default_factory=dict)
    passed: Optional[bool] = None
    exit_code: int = 0
