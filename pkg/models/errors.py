from typing import Optional


class ToricSolitonError(Exception):
    """Error base del motor de solitones; lleva el detalle y el código de salida de la CLI"""

    exit_code: int = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class InvalidInputError(ToricSolitonError):
    """Entrada inválida: polígono degenerado, signos de etiquetas, documento mal formado"""


class ClassificationMismatchError(ToricSolitonError):
    """No existe normalización afín para la clase pedida"""


class UnsupportedError(ToricSolitonError):
    """Operación no definida para este tipo de polítopo"""


class NoUniqueRootError(ToricSolitonError):
    """La ecuación en la tasa a no tiene una única raíz acotable"""


class NoSolutionForAnsatzError(ToricSolitonError):
    """El ansatz de Calabi no admite solución (C_b2 != -C_b1)"""

    exit_code = 2


class NoSignChangeError(ToricSolitonError):
    """La función a_A - a_B no cambia de signo en el intervalo"""


class NotMonotoneError(ToricSolitonError):
    """El polítopo etiquetado no es monótono"""


class DegenerateShapeError(ToricSolitonError):
    """Sistema lineal de rango deficiente (forma degenerada)"""


class InvalidReebVectorError(ToricSolitonError):
    """El vector de Reeb no es positivo en todos los vértices"""


class StencilError(ToricSolitonError):
    """El esténcil de diferencias finitas sale del dominio"""
