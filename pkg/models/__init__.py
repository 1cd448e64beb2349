from .schemas import *
from .errors import *
from .settings import SolverSettings, get_settings
from .expquad_engine import BivariatePoly, ExpPolyProfile, ExpQuadEngine, Poly
from .polytope_engine import PolytopeEngine
from .solver_engine import SolitonSolver
from .verify_engine import MetricField, VerificationEngine
from .sasaki_engine import SasakiEngine
from .report_writer import ReportWriter
