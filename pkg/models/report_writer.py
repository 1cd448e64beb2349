import logging
import os
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from models.schemas import (
    AffineMap2,
    Classification,
    ReportDocument,
    ResidualReport,
    SolitonSolution,
    SolitonStatus,
)

logger = logging.getLogger(__name__)

PROFILE_HEADER = "t,value,d1,d2"
RESIDUAL_HEADER = "mu1,mu2,scal_fd,laplacian,residual"


class ReportWriter:
    """Arma el reporte JSON y las tablas CSV de perfiles y residuos"""

    def __init__(self, table_points: int = 11, csv_points: int = 201):
        self.table_points = table_points
        self.csv_points = csv_points

    # ------------------------------------------------------------------
    # Construcción del documento
    # ------------------------------------------------------------------

    def from_solution(
        self,
        command: str,
        payload: Dict[str, Any],
        solution: SolitonSolution,
        classification: Optional[Classification] = None,
        affine_map: Optional[AffineMap2] = None,
        residual: Optional[ResidualReport] = None,
        extra: Optional[Dict[str, Any]] = None,
    ) -> ReportDocument:
        passed = residual.passed if residual is not None else None
        return ReportDocument(
            command=command,
            input=payload,
            classification=classification.case if classification else solution.case,
            canonical=solution.params,
            affine_map=affine_map,
            scal_bar=solution.scal_bar,
            m=solution.m,
            lambda_=solution.lambda_,
            a=solution.a,
            status=solution.status,
            rate_a=solution.rate_a,
            rate_b=solution.rate_b,
            monotone=solution.monotone,
            preferred_point=solution.preferred_point,
            residual=residual,
            extra={**solution.diagnostics, **(extra or {})},
            profiles=self.profile_tables(solution, self.table_points),
            passed=passed,
            exit_code=self.exit_code(solution, residual),
        )

    @staticmethod
    def exit_code(solution: Optional[SolitonSolution], residual: Optional[ResidualReport] = None) -> int:
        if solution is not None and solution.status == SolitonStatus.NO_ORTHOTORIC:
            return 2
        if residual is not None and not residual.passed:
            return 1
        return 0

    def profile_tables(self, solution: SolitonSolution, points: int) -> Dict[str, List[Tuple[float, float, float, float]]]:
        """Muestras (t, valor, primera y segunda derivada) de A en [α₁, α₂] y B en [β₁, β₂]"""
        params = solution.params
        tables = {}
        for name, profile, lo, hi in (
            ("A", solution.profile_a, params.a1, params.a2),
            ("B", solution.profile_b, params.b1, params.b2),
        ):
            t = np.linspace(lo, hi, points)
            columns = np.column_stack(
                [t, profile.value(t), profile.derivative(t), profile.second_derivative(t)]
            )
            tables[name] = [tuple(float(v) for v in row) for row in columns]
        return tables

    # ------------------------------------------------------------------
    # Escritura
    # ------------------------------------------------------------------

    @staticmethod
    def render(document: ReportDocument) -> str:
        return document.model_dump_json(by_alias=True, indent=2)

    def write(self, document: ReportDocument, path: str) -> str:
        folder = os.path.dirname(path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.render(document))
        return path

    def write_csv(
        self, directory: str, solution: Optional[SolitonSolution], residual: Optional[ResidualReport] = None
    ) -> List[str]:
        """profile_A.csv, profile_B.csv y residual.csv"""
        os.makedirs(directory, exist_ok=True)
        written = []
        if solution is not None:
            for name, rows in self.profile_tables(solution, self.csv_points).items():
                path = os.path.join(directory, f"profile_{name}.csv")
                np.savetxt(path, np.array(rows), delimiter=",", header=PROFILE_HEADER, comments="")
                written.append(path)
        if residual is not None and residual.samples:
            path = os.path.join(directory, "residual.csv")
            np.savetxt(path, np.array(residual.samples), delimiter=",", header=RESIDUAL_HEADER, comments="")
            written.append(path)
        logger.debug("CSV escritos: %s", written)
        return written
