import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from models.errors import InvalidReebVectorError
from models.polytope_engine import PolytopeEngine
from models.schemas import (
    AffineFunction,
    CharacteristicPolytope,
    LabelledPolytope,
    ReebVector,
    SasakiFamilyResult,
)
from models.settings import SolverSettings, get_settings
from models.solver_engine import SolitonSolver
from models.verify_engine import VerificationEngine

logger = logging.getLogger(__name__)


class SasakiEngine:
    """Polítopos característicos de conos tóricos y la familia de S²×S³ sobre el cuadrado"""

    def __init__(
        self,
        settings: Optional[SolverSettings] = None,
        solver: Optional[SolitonSolver] = None,
        verifier: Optional[VerificationEngine] = None,
    ):
        self.settings = settings or get_settings()
        self.solver = solver or SolitonSolver(self.settings)
        self.polytopes: PolytopeEngine = self.solver.polytopes
        self.verifier = verifier or VerificationEngine(self.settings, self.polytopes)

    def delzant_square(self) -> LabelledPolytope:
        """[-1, 1]² con etiquetas primitivas"""
        return self.polytopes.build_polytope(
            [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)],
            [(0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 0.0)],
            names=["y+1", "1-x", "1-y", "x+1"],
        )

    # ------------------------------------------------------------------
    # Polítopo característico
    # ------------------------------------------------------------------

    def characteristic_polytope(self, base: LabelledPolytope, reeb: ReebVector) -> CharacteristicPolytope:
        """Imagen de Ψ_b(μ) = ev_μ / (2 b(μ)) en la carta que omite la coordenada de mayor |b_j|"""
        b = reeb.as_array()
        values = [reeb.value(p) for p in base.vertices]
        if min(values) <= 0:
            raise InvalidReebVectorError(f"b no es positivo en los vértices: {values}")

        chart = int(np.argmax(np.abs(b)))
        rest = [i for i in range(3) if i != chart]
        images = [np.array([1.0, p[0], p[1]]) / (2.0 * value) for p, value in zip(base.vertices, values)]

        names = [facet.name or f"L{k}" for k, facet in enumerate(base.facets)]
        normals = []
        for facet in base.facets:
            label = np.array([facet.offset, facet.normal[0], facet.normal[1]])
            normals.append(tuple(label[i] - label[chart] * b[i] / b[chart] for i in rest))
        vertices = [tuple(image[rest]) for image in images]
        polytope = self.polytopes.build_polytope(vertices, normals, names)
        facet_map = tuple(names.index(facet.name) for facet in polytope.facets)
        return CharacteristicPolytope(
            polytope=polytope,
            reeb=reeb,
            chart_index=chart,
            images=tuple(tuple(map(float, image)) for image in images),
            facet_map=facet_map,
        )

    def chart_function(self, char: CharacteristicPolytope, vector: Sequence[float]) -> AffineFunction:
        """⟨y, v⟩ restringido a {⟨y,b⟩ = 1/2} y escrito en la carta"""
        b = char.reeb.as_array()
        v = np.asarray(vector, dtype=float)
        j = char.chart_index
        rest = [i for i in range(3) if i != j]
        linear = tuple(float(v[i] - v[j] * b[i] / b[j]) for i in rest)
        return AffineFunction(constant=float(v[j] / (2.0 * b[j])), linear=linear)

    def lift_affine(self, char: CharacteristicPolytope, linear: Sequence[float], constant: float = 0.0) -> np.ndarray:
        """Elemento v con ⟨y, v⟩ = ⟨linear, z⟩ + constant sobre la carta"""
        vector = np.zeros(3)
        rest = [i for i in range(3) if i != char.chart_index]
        vector[rest] = np.asarray(linear, dtype=float)
        return vector + 2.0 * constant * char.reeb.as_array()

    def pullback_equipoise_check(
        self, vector: Sequence[float], base: LabelledPolytope, reeb: ReebVector
    ) -> Tuple[float, float]:
        """(Σ(-1)^i v(p_i)/(2b(p_i)) en la base, residuo de equilibrio en Δ_b)"""
        v = np.asarray(vector, dtype=float)
        pulled = AffineFunction(constant=v[0], linear=(v[1], v[2]))
        weights = [pulled(p) / (2.0 * reeb.value(p)) for p in base.vertices]
        base_residual = weights[0] - weights[1] + weights[2] - weights[3]
        char = self.characteristic_polytope(base, reeb)
        chart_residual = self.polytopes.equipoised_residual(self.chart_function(char, v), char.polytope)
        return float(base_residual), float(chart_residual)

    def reeb_regularity(self, reeb: ReebVector) -> str:
        if reeb.b1 == 0.0 and reeb.b2 == 0.0:
            return "regular"
        ratios = [reeb.b1 / reeb.b0, reeb.b2 / reeb.b0]
        if all(self.polytopes.nearest_rational(r).rational for r in ratios):
            return "quasi-regular"
        return "irregular"

    # ------------------------------------------------------------------
    # Familia de S²×S³
    # ------------------------------------------------------------------

    def s2s3_family(self, b0: float, b2: float, verify: bool = True) -> SasakiFamilyResult:
        """Solitón en el polítopo característico de b = (b₀, 0, b₂) sobre el cuadrado"""
        if not b0 > abs(b2):
            raise InvalidReebVectorError(f"se requiere b₀ > |b₂| (b₀ = {b0}, b₂ = {b2})")
        reeb = ReebVector(b0=b0, b1=0.0, b2=b2)
        base = self.delzant_square()
        char = self.characteristic_polytope(base, reeb)
        case = self.polytopes.classify(char.polytope)
        params, phi = self.polytopes.normalize(char.polytope, case)
        solution = self.solver.solve(params)

        # ⟨a, Φ(z)⟩ = ⟨Mᵀa, z⟩ + ⟨a, t⟩
        a = np.asarray(solution.a)
        lifted = self.lift_affine(char, phi.matrix.T @ a, float(a @ phi.shift))
        base_residual, chart_residual = self.pullback_equipoise_check(lifted, base, reeb)
        scale = max(1.0, float(np.max(np.abs(lifted))))
        tol = self.settings.equipoise_tol * scale
        residual = self.verifier.soliton_residual(solution) if verify else None
        logger.info("S²×S³ con b = (%g, 0, %g): a = %s", b0, b2, solution.a)
        return SasakiFamilyResult(
            reeb=reeb,
            characteristic=char,
            classification=case,
            params=params,
            affine_map=phi,
            solution=solution,
            regularity=self.reeb_regularity(reeb),
            lifted_vector=tuple(map(float, lifted)),
            equipoise_base=base_residual,
            equipoise_chart=chart_residual,
            equipoised=bool(abs(base_residual) <= tol and abs(chart_residual) <= tol),
            residual=residual,
        )

    def continuity_check(self, b0: float, b2_values: Sequence[float]) -> Tuple[List[Tuple[float, float]], bool]:
        """|a₁| a lo largo de b₂ → 0; verdadero si decrece estrictamente"""
        rows = []
        for b2 in b2_values:
            result = self.s2s3_family(b0, b2, verify=False)
            rows.append((float(b2), abs(result.solution.a[0])))
        ordered = sorted(rows, key=lambda row: -abs(row[0]))
        decreasing = all(later[1] < earlier[1] for earlier, later in zip(ordered, ordered[1:]))
        return rows, decreasing
