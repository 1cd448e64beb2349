import argparse
import json
import logging
import os
import sys
import traceback
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from models import (
    AffineFunction,
    InputSpec,
    ReportDocument,
    ReportWriter,
    SasakiEngine,
    SolitonSolver,
    SolitonStatus,
    SolverSettings,
    ToricSolitonError,
    UnsupportedError,
    VerificationEngine,
)

COMMANDS = ("classify", "solve", "verify", "wpp-calabi", "wpp-ortho", "family-solve", "cone-scan", "sasaki-s2s3")

# Variantes de entrada aceptadas por cada comando
ACCEPTED_VARIANTS = {
    "classify": ("polytope", "canonical"),
    "solve": ("polytope", "canonical"),
    "verify": ("polytope", "canonical"),
    "wpp-calabi": ("wpp",),
    "wpp-ortho": ("wpp",),
    "family-solve": ("family",),
    "cone-scan": ("cone_scan",),
    "sasaki-s2s3": ("sasaki",),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toric-soliton",
        description="Solitones de Kähler-Ricci generalizados en cuadriláteros y triángulos etiquetados",
    )
    parser.add_argument("command", choices=COMMANDS, help="operación a ejecutar")
    parser.add_argument("spec", help="documento JSON de entrada")
    parser.add_argument("--grid", type=int, default=None, help="puntos por eje de la malla de verificación")
    parser.add_argument("--h", type=float, default=None, help="paso fijo de diferencias finitas")
    parser.add_argument("--tol", type=float, default=None, help="tolerancia del residuo")
    parser.add_argument("--csv", default=None, help="directorio para profile_A.csv, profile_B.csv y residual.csv")
    parser.add_argument("--strict", action="store_true", help="reduce todas las tolerancias a la mitad")
    parser.add_argument("--out", default="report.json", help="ruta del reporte JSON")
    return parser


def build_settings(args: argparse.Namespace) -> SolverSettings:
    settings = SolverSettings()
    if args.strict:
        settings = settings.strict()
    overrides: Dict[str, Any] = {}
    if args.grid is not None:
        overrides["grid_points"] = args.grid
    if args.h is not None:
        overrides["fd_step"] = args.h
    if args.tol is not None:
        overrides["residual_tol"] = args.tol
    return settings.model_copy(update=overrides) if overrides else settings


def configure_logging(settings: SolverSettings) -> None:
    # Sistema de Logs
    logging.basicConfig(
        filename=settings.log_file,
        level=getattr(logging, settings.log_level.upper(), logging.ERROR),
        format='%(asctime)s - %(levelname)s - %(message)s'
    )


def load_spec(path: str) -> InputSpec:
    with open(path, "r", encoding="utf-8") as f:
        return InputSpec.model_validate(json.load(f))


def validation_messages(exc: ValidationError) -> List[str]:
    return [f"{'.'.join(str(p) for p in err['loc']) or '<raíz>'}: {err['msg']}" for err in exc.errors()]


class CommandRunner:
    """Despacha cada comando a los motores y arma el reporte"""

    def __init__(self, settings: SolverSettings, writer: Optional[ReportWriter] = None):
        self.settings = settings
        self.solver = SolitonSolver(settings)
        self.polytopes = self.solver.polytopes
        self.verifier = VerificationEngine(settings, self.polytopes)
        self.sasaki = SasakiEngine(settings, self.solver, self.verifier)
        self.writer = writer or ReportWriter()

    def execute(self, command: str, spec: InputSpec) -> Tuple[ReportDocument, Any, Any]:
        """(reporte, solución, residuo)"""
        variant = spec.variant
        if variant not in ACCEPTED_VARIANTS[command]:
            raise UnsupportedError(f"'{command}' no acepta la variante '{variant}'")
        payload = spec.model_dump(mode="json", exclude_none=True)
        handler = getattr(self, "_" + command.replace("-", "_"))
        return handler(command, spec, payload)

    # ------------------------------------------------------------------
    # Comandos
    # ------------------------------------------------------------------

    def _resolve(self, spec: InputSpec):
        """(clasificación, parámetros, mapa afín) para polytope o canonical"""
        if spec.polytope is not None:
            poly = self.polytopes.from_input(spec.polytope)
            classification = self.polytopes.classify_detailed(poly, spec.polytope.triangle_hint)
            params, phi = self.polytopes.normalize(poly, classification.case)
            return classification, params, phi, poly
        return None, spec.canonical, None, None

    def _classify(self, command, spec, payload):
        classification, params, phi, _ = self._resolve(spec)
        scal, m = self.solver.average_scalar(params)
        monotone, point = self.polytopes.monotone_check(params)
        delzant, note = self.polytopes.delzant_check(params)
        document = ReportDocument(
            command=command,
            input=payload,
            classification=classification.case if classification else params.case,
            canonical=params,
            affine_map=phi,
            scal_bar=scal,
            m=m,
            lambda_=scal / 4.0,
            monotone=monotone,
            preferred_point=point,
            rationality=self.polytopes.rationality_parameters(params),
            delzant=delzant,
            extra={"delzant_note": note, "near_degenerate": bool(classification and classification.near_degenerate)},
        )
        return document, None, None

    def _solve(self, command, spec, payload, verify: bool = False):
        if spec.polytope is not None:
            poly = self.polytopes.from_input(spec.polytope)
            classification, params, phi, solution = self.solver.solve_polytope(poly, spec.polytope.triangle_hint)
        else:
            classification, params, phi = None, spec.canonical, None
            solution = self.solver.solve(params)

        residual = None
        if verify and solution.status != SolitonStatus.NO_ORTHOTORIC:
            residual = self.verifier.verify(solution)
        extra = self._solution_extra(solution)
        document = self.writer.from_solution(command, payload, solution, classification, phi, residual, extra)
        delzant, _ = self.polytopes.delzant_check(params)
        document = document.model_copy(
            update={
                "rationality": self.polytopes.rationality_parameters(params),
                "delzant": delzant,
                "equipoised": self._equipoised(solution),
            }
        )
        return document, solution, residual

    def _verify(self, command, spec, payload):
        return self._solve(command, spec, payload, verify=True)

    def _wpp_calabi(self, command, spec, payload):
        solution = self.solver.solve_wpp_calabi(spec.wpp.weights)
        return self._verified(command, payload, solution)

    def _wpp_ortho(self, command, spec, payload):
        solution = self.solver.solve_wpp_orthotoric(spec.wpp.weights)
        return self._verified(command, payload, solution)

    def _family_solve(self, command, spec, payload):
        family = spec.family
        beta, solution = self.solver.solve_family(family.r, family.k, family.l, family.p, family.bracket)
        return self._verified(command, payload, solution, {"beta_star": beta})

    def _cone_scan(self, command, spec, payload):
        scan = spec.cone_scan
        cone = self.solver.normal_cone(scan.shape, scan.a1)
        rows = []
        if not cone.is_empty:
            thetas = [0.5] if scan.samples == 1 else np.linspace(0.1, 0.9, scan.samples)
            for theta in thetas:
                params = self.solver.cone_parameters(scan.shape, cone.sample(float(theta)))
                solution = self.solver.solve_orthotoric(params)
                rows.append(
                    {
                        "theta": float(theta),
                        "c": list(params.c),
                        "rate_a": solution.rate_a,
                        "rate_b": solution.rate_b,
                        "status": solution.status.value,
                        "monotone": solution.monotone,
                    }
                )
        document = ReportDocument(
            command=command,
            input=payload,
            extra={"cone": cone.model_dump(mode="json"), "empty": cone.is_empty, "samples": rows},
        )
        return document, None, None

    def _sasaki_s2s3(self, command, spec, payload):
        result = self.sasaki.s2s3_family(spec.sasaki.b0, spec.sasaki.b2)
        extra = {
            "regularity": result.regularity,
            "characteristic_vertices": [list(v) for v in result.characteristic.polytope.vertices],
            "lifted_vector": list(result.lifted_vector),
            "equipoise_base": result.equipoise_base,
            "equipoise_chart": result.equipoise_chart,
        }
        document = self.writer.from_solution(
            command, payload, result.solution, None, result.affine_map, result.residual, extra
        )
        document = document.model_copy(
            update={"classification": result.classification, "equipoised": result.equipoised}
        )
        return document, result.solution, result.residual

    # ------------------------------------------------------------------
    # Auxiliares
    # ------------------------------------------------------------------

    def _verified(self, command, payload, solution, extra: Optional[Dict[str, Any]] = None):
        residual = None
        if solution.status != SolitonStatus.NO_ORTHOTORIC:
            residual = self.verifier.verify(solution)
        merged = {**self._solution_extra(solution), **(extra or {})}
        document = self.writer.from_solution(command, payload, solution, None, None, residual, merged)
        return document.model_copy(update={"equipoised": self._equipoised(solution)}), solution, residual

    def _equipoised(self, solution) -> Optional[bool]:
        if solution.case.is_triangle:
            return None
        f = AffineFunction(constant=0.0, linear=solution.a)
        residual = self.polytopes.equipoised_residual(f, self.polytopes.canonical_polytope(solution.params))
        return bool(abs(residual) <= self.settings.equipoise_tol)

    def _solution_extra(self, solution) -> Dict[str, Any]:
        extra: Dict[str, Any] = {}
        if solution.monotone and solution.status != SolitonStatus.NO_ORTHOTORIC:
            extra["soliton_vector_residual"] = list(self.solver.soliton_vector_residual(solution.params, solution.a))
        if solution.case.is_orthotoric:
            extra["csc"] = self.solver.csc_condition(solution.params)
        return extra


def run(command: str, path: str, args: argparse.Namespace) -> int:
    """Ejecuta un comando; devuelve el código de salida (0, 1 o 2)"""
    settings = build_settings(args)
    configure_logging(settings)
    writer = ReportWriter()
    payload: Dict[str, Any] = {"path": path}
    try:
        spec = load_spec(path)
        payload = spec.model_dump(mode="json", exclude_none=True)
        document, solution, residual = CommandRunner(settings, writer).execute(command, spec)
        if args.csv:
            writer.write_csv(args.csv, solution, residual)
    except ValidationError as e:
        messages = validation_messages(e)
        print(f"Entrada inválida: {'; '.join(messages)}", file=sys.stderr)
        document = ReportDocument(command=command, input=payload, extra={"errors": messages}, exit_code=1)
    except (OSError, json.JSONDecodeError) as e:
        print(f"No se pudo leer {path}: {e}", file=sys.stderr)
        document = ReportDocument(command=command, input=payload, extra={"errors": [str(e)]}, exit_code=1)
    except ToricSolitonError as e:
        print(f"{type(e).__name__}: {e.detail}", file=sys.stderr)
        document = ReportDocument(
            command=command,
            input=payload,
            extra={"errors": [e.detail], "error_type": type(e).__name__},
            exit_code=e.exit_code,
        )
    except Exception as e:
        logging.error(f"Error en {command}: {traceback.format_exc()}")
        print(f"Error inesperado: {e}", file=sys.stderr)
        document = ReportDocument(command=command, input=payload, extra={"errors": [str(e)]}, exit_code=1)

    try:
        rendered = writer.render(document)
    except Exception as e:
        logging.error(f"Error al serializar el reporte de {command}: {traceback.format_exc()}")
        print(f"Reporte no serializable: {e}", file=sys.stderr)
        document = ReportDocument(command=command, input=payload, extra={"errors": [str(e)]}, exit_code=1)
        rendered = writer.render(document)

    print(rendered)
    if args.out:
        writer.write(document, args.out)
        print(f"Reporte guardado en {os.path.abspath(args.out)} (código {document.exit_code})", file=sys.stderr)
    return document.exit_code


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.command, args.spec, args)


if __name__ == "__main__":
    sys.exit(main())
