from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


# Campos que se reducen a la mitad en modo estricto
_TOLERANCE_FIELDS = (
    "root_xtol",
    "rate_agreement_tol",
    "monotone_rtol",
    "parallel_tol",
    "ansatz_tol",
    "rational_tol",
    "family_tol",
    "residual_tol",
    "bc_value_tol",
    "bc_derivative_tol",
    "apex_spread_tol",
    "profile_identity_tol",
    "profile_boundary_tol",
    "equipoise_tol",
)


class SolverSettings(BaseSettings):
    """Configuración numérica del motor (variables de entorno TORICSOLITON_*)"""

    model_config = SettingsConfigDict(
        env_prefix="TORICSOLITON_",
        env_file=".env",
        extra="ignore",
        frozen=True,
    )

    # Raíces en la tasa a
    root_xtol: float = 1e-13
    rate_agreement_tol: float = 1e-9
    bracket_start: float = 1.0
    bracket_cap: float = 1e6

    # Serie para |a| pequeño
    series_threshold: float = 1e-4
    series_order: int = Field(default=8, ge=2, le=16)

    # Geometría del polítopo
    monotone_rtol: float = 1e-10
    parallel_tol: float = 1e-9
    ansatz_tol: float = 1e-10
    rational_max_denominator: int = 10**6
    rational_tol: float = 1e-9
    rational_detect_denominator: int = 1000

    # Familias y planos proyectivos con pesos
    beta_scan_points: int = Field(default=64, ge=4)
    family_tol: float = 1e-10

    # Verificación
    residual_tol: float = 1e-6
    grid_points: int = Field(default=50, ge=2)
    grid_margin: float = Field(default=0.05, gt=0.0, lt=0.5)
    fd_scale: float = 1e-4
    fd_floor: float = 1e-7
    fd_step: float | None = None
    fd_order: Literal[2, 4] = 4
    fd_precision: int = Field(default=40, ge=20)
    bc_value_tol: float = 1e-12
    bc_derivative_tol: float = 1e-5
    bc_samples: int = 20
    apex_rays: int = 8
    apex_spread_tol: float = 1e-4
    positivity_samples: int = 1000
    profile_identity_tol: float = 1e-8
    profile_boundary_tol: float = 1e-9
    equipoise_tol: float = 1e-9

    # Sistema de logs
    log_file: str = "toric_soliton.log"
    log_level: str = "ERROR"

    def strict(self) -> "SolverSettings":
        """Copia con todas las tolerancias reducidas a la mitad"""
        return self.model_copy(update={name: getattr(self, name) / 2 for name in _TOLERANCE_FIELDS})


@lru_cache(maxsize=1)
def get_settings() -> SolverSettings:
    """Configuración por defecto compartida"""
    return SolverSettings()
