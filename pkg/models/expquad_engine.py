import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import brentq
from scipy.special import binom, factorial, gammainc

from models.errors import InvalidInputError, NoUniqueRootError
from models.settings import SolverSettings, get_settings

logger = logging.getLogger(__name__)

MAX_DEGREE = 6


def _trim(coeffs: Sequence[float]) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(coeffs, dtype=float))
    arr = P.polytrim(arr, tol=0.0) if arr.size > 1 else arr
    return arr if arr.size else np.zeros(1)


@dataclass(frozen=True)
class Poly:
    """Polinomio real en una variable, coeficientes en orden ascendente"""

    coeffs: Tuple[float, ...]

    @classmethod
    def of(cls, *coeffs: float) -> "Poly":
        return cls(tuple(float(c) for c in _trim(coeffs)))

    @classmethod
    def from_array(cls, coeffs) -> "Poly":
        return cls(tuple(float(c) for c in _trim(coeffs)))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not np.any(self.array)

    def __call__(self, x):
        return P.polyval(x, self.array)

    def derivative(self) -> "Poly":
        return Poly.from_array(P.polyder(self.array)) if self.degree > 0 else Poly.of(0.0)

    def antiderivative(self, lower: float = 0.0) -> "Poly":
        """Primitiva que se anula en `lower`"""
        return Poly.from_array(P.polyint(self.array, lbnd=lower))

    def __add__(self, other: "Poly") -> "Poly":
        return Poly.from_array(P.polyadd(self.array, _as_coeffs(other)))

    def __sub__(self, other: "Poly") -> "Poly":
        return Poly.from_array(P.polysub(self.array, _as_coeffs(other)))

    def __mul__(self, other) -> "Poly":
        if isinstance(other, Poly):
            return Poly.from_array(P.polymul(self.array, other.array))
        return Poly.from_array(self.array * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "Poly":
        return Poly.from_array(-self.array)


def _as_coeffs(value) -> np.ndarray:
    if isinstance(value, Poly):
        return value.array
    return np.array([float(value)])


@dataclass(frozen=True)
class BivariatePoly:
    """Polinomio en (x, a): coeffs[i, j] multiplica x^i a^j"""

    coeffs: np.ndarray = field(compare=False)

    def __call__(self, x, a):
        return P.polyval2d(x, a, self.coeffs)

    def __sub__(self, other: "BivariatePoly") -> "BivariatePoly":
        rows = max(self.coeffs.shape[0], other.coeffs.shape[0])
        cols = max(self.coeffs.shape[1], other.coeffs.shape[1])
        out = np.zeros((rows, cols))
        out[: self.coeffs.shape[0], : self.coeffs.shape[1]] += self.coeffs
        out[: other.coeffs.shape[0], : other.coeffs.shape[1]] -= other.coeffs
        return BivariatePoly(out)

    def coefficient_in_x(self, power: int) -> Poly:
        """Coeficiente de x^power como polinomio en a"""
        if power >= self.coeffs.shape[0]:
            return Poly.of(0.0)
        return Poly.from_array(self.coeffs[power])

    def x_degree(self, tol: float = 0.0) -> int:
        rows = [i for i in range(self.coeffs.shape[0]) if np.any(np.abs(self.coeffs[i]) > tol)]
        return max(rows) if rows else 0


@dataclass(frozen=True)
class ExpPolyProfile:
    """Perfil A(x) = e^{2ax} ∫_{x0}^{x} f(t) e^{-2at} dt, que cumple A' - 2aA = f y A(x0) = 0"""

    kernel: Poly
    rate: float
    anchor: float
    engine: "ExpQuadEngine" = field(repr=False, compare=False)

    def value(self, x):
        arr = np.asarray(x, dtype=float)
        flat = np.atleast_1d(arr).ravel()
        lo = np.minimum(flat, self.anchor)
        hi = np.maximum(flat, self.anchor)
        scaled, log_weight = self.engine.scaled_poly_integral(self.kernel.array, self.rate, lo, hi)
        orientation = np.where(flat >= self.anchor, 1.0, -1.0)
        out = orientation * scaled * np.exp(log_weight + 2.0 * self.rate * flat)
        return out.reshape(arr.shape) if arr.ndim else float(out[0])

    def __call__(self, x):
        return self.value(x)

    def derivative(self, x):
        return self.kernel(x) + 2.0 * self.rate * self.value(x)

    def second_derivative(self, x):
        return self.kernel.derivative()(x) + 2.0 * self.rate * self.derivative(x)

    @property
    def polynomial_part(self) -> Poly:
        """Parte polinomial -Q de la forma cerrada A = -Q(x) + κ e^{2ax}"""
        if self.rate == 0.0:
            return self.kernel.antiderivative(self.anchor)
        return -self._q_poly()

    @property
    def kappa(self) -> float:
        if self.rate == 0.0:
            return 0.0
        return float(self._q_poly()(self.anchor) * np.exp(-2.0 * self.rate * self.anchor))

    def closed_form(self, x):
        """Evaluación directa de -Q(x) + κ e^{2ax}; sólo estable para |a| moderado"""
        return self.polynomial_part(x) + self.kappa * np.exp(2.0 * self.rate * np.asarray(x, dtype=float))

    def _q_poly(self) -> Poly:
        # Q' - 2aQ = -f, resuelto desde el grado más alto
        f = self.kernel.array
        q = np.zeros(f.size)
        for j in range(f.size - 1, -1, -1):
            upper = (j + 1) * q[j + 1] if j + 1 < f.size else 0.0
            q[j] = (f[j] + upper) / (2.0 * self.rate)
        return Poly.from_array(q)


class ExpQuadEngine:
    """Integrales exactas de polinomio por exponencial y raíces en la tasa a"""

    def __init__(self, settings: Optional[SolverSettings] = None):
        self.settings = settings or get_settings()

    # ------------------------------------------------------------------
    # Momentos
    # ------------------------------------------------------------------

    def moment_integral(self, k: int, a: float, x0: float, x1: float) -> float:
        """∫_{x0}^{x1} t^k e^{-2at} dt"""
        if not 0 <= k <= MAX_DEGREE:
            raise InvalidInputError(f"grado de momento fuera de rango: {k}")
        if x1 < x0:
            return -self.moment_integral(k, a, x1, x0)
        moments, log_weight = self.scaled_moments(k, a, [x0], [x1])
        return float(moments[k, 0] * np.exp(log_weight[0]))

    def integrate_poly_exp(self, f: Poly, a: float, x0: float, x1: float) -> float:
        """∫_{x0}^{x1} f(t) e^{-2at} dt"""
        self._check_degree(f)
        if x1 < x0:
            return -self.integrate_poly_exp(f, a, x1, x0)
        scaled, log_weight = self.scaled_poly_integral(f.array, a, [x0], [x1])
        return float(scaled[0] * np.exp(log_weight[0]))

    def rate_derivative(self, f: Poly, a: float, x0: float, x1: float) -> float:
        """d/da ∫ f e^{-2at} = -2 ∫ t f(t) e^{-2at} dt"""
        self._check_degree(f)
        if x1 < x0:
            return -self.rate_derivative(f, a, x1, x0)
        scaled, log_weight = self.scaled_poly_integral(P.polymulx(f.array), a, [x0], [x1])
        return float(-2.0 * scaled[0] * np.exp(log_weight[0]))

    def scaled_moments(self, kmax: int, a: float, lo, hi) -> Tuple[np.ndarray, np.ndarray]:
        """Momentos M_k con ∫_{lo}^{hi} t^k e^{-2at} dt = M_k · exp(log_weight); lo <= hi por componente"""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        lo, hi = np.broadcast_arrays(lo, hi)
        moments = np.zeros((kmax + 1, lo.size))
        log_weight = np.zeros(lo.size)

        series = np.abs(a) * (hi - lo) < self.settings.series_threshold
        if np.any(series):
            m, w = self._series_moments(kmax, 2.0 * a, lo[series], hi[series])
            moments[:, series] = m
            log_weight[series] = w
        closed = ~series
        if np.any(closed):
            m, w = self._closed_moments(kmax, 2.0 * a, lo[closed], hi[closed])
            moments[:, closed] = m
            log_weight[closed] = w
        return moments, log_weight

    def scaled_poly_integral(self, coeffs, a: float, lo, hi) -> Tuple[np.ndarray, np.ndarray]:
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
        moments, log_weight = self.scaled_moments(coeffs.size - 1, a, lo, hi)
        return coeffs @ moments, log_weight

    def _closed_moments(self, kmax: int, lam: float, lo: np.ndarray, hi: np.ndarray):
        # t = base ± v con v en [0, h]; la función gamma incompleta regularizada da ∫_0^h v^i e^{-|λ|v} dv
        mu = abs(lam)
        if lam > 0:
            base, flip = lo, 1.0
        else:
            base, flip = hi, -1.0
        width = hi - lo
        powers = np.arange(kmax + 1)
        shifted = (
            factorial(powers)[:, None]
            * gammainc(powers[:, None] + 1, mu * width[None, :])
            / mu ** (powers[:, None] + 1)
        )
        moments = np.zeros((kmax + 1, lo.size))
        for k in range(kmax + 1):
            for i in range(k + 1):
                moments[k] += binom(k, i) * base ** (k - i) * flip**i * shifted[i]
        return moments, -lam * base

    def _series_moments(self, kmax: int, lam: float, lo: np.ndarray, hi: np.ndarray):
        # Serie de Taylor de e^{-λ(t-c)} alrededor del punto medio
        order = self.settings.series_order
        center = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        top = order + kmax
        sym = np.zeros((top + 1, lo.size))
        for q in range(0, top + 1, 2):
            sym[q] = 2.0 * half ** (q + 1) / (q + 1)
        moments = np.zeros((kmax + 1, lo.size))
        for n in range(order + 1):
            weight = (-lam) ** n / factorial(n)
            for k in range(kmax + 1):
                for j in range(k + 1):
                    moments[k] += weight * binom(k, j) * center ** (k - j) * sym[n + j]
        return moments, -lam * center

    # ------------------------------------------------------------------
    # Perfiles y raíces
    # ------------------------------------------------------------------

    def profile_from_kernel(self, f: Poly, a: float, x0: float) -> ExpPolyProfile:
        self._check_degree(f)
        return ExpPolyProfile(kernel=f, rate=float(a), anchor=float(x0), engine=self)

    def unique_rate_root(self, f: Poly, x0: float, x1: float) -> float:
        """Única raíz a de ∫_{x0}^{x1} f(t) e^{-2at} dt = 0"""
        self._check_degree(f)
        if not x0 < x1:
            raise InvalidInputError(f"intervalo vacío [{x0}, {x1}]")
        near_sign, far_sign = self._sign_change(f, x0, x1)

        mass = float(np.mean(np.abs(f(np.linspace(x0, x1, 65))))) * (x1 - x0)
        at_zero = self.integrate_poly_exp(f, 0.0, x0, x1)
        if abs(at_zero) <= 1e-15 * mass:
            return 0.0

        # a → +∞ concentra el peso en x0; a → -∞ en x1
        side = -1.0 if np.sign(at_zero) == near_sign else 1.0
        ref = x0 if side > 0 else x1

        def g(a: float) -> float:
            scaled, log_weight = self.scaled_poly_integral(f.array, a, [x0], [x1])
            return float(scaled[0] * np.exp(log_weight[0] + 2.0 * a * ref))

        start_sign = np.sign(at_zero)
        previous, bound = 0.0, self.settings.bracket_start
        while True:
            value = g(side * bound)
            if value == 0.0:
                return side * bound
            if np.sign(value) != start_sign:
                break
            previous, bound = bound, 2.0 * bound
            if bound > self.settings.bracket_cap:
                raise NoUniqueRootError(
                    f"sin cambio de signo en a hasta |a| = {self.settings.bracket_cap:g} en [{x0}, {x1}]"
                )
        logger.debug("Raíz en a acotada en [%g, %g]", side * previous, side * bound)

        lo, hi = sorted((side * previous, side * bound))
        xtol = self.settings.root_xtol
        root = brentq(g, lo, hi, xtol=xtol, rtol=max(xtol, 4 * np.finfo(float).eps))
        return self._polish(f, g, root, ref, x0, x1)

    def _sign_change(self, f: Poly, x0: float, x1: float) -> Tuple[float, float]:
        if f.is_zero or f.degree == 0:
            raise NoUniqueRootError("el núcleo no cambia de signo")
        roots = P.polyroots(f.array)
        real = roots[np.abs(roots.imag) <= 1e-9 * (1.0 + np.abs(roots.real))].real
        pad = 1e-12 * max(1.0, x1 - x0)
        interior = np.unique(np.round(real[(real > x0 + pad) & (real < x1 - pad)], 12))
        if interior.size != 1:
            raise NoUniqueRootError(f"el núcleo tiene {interior.size} ceros interiores en [{x0}, {x1}]")
        root = float(interior[0])
        near = np.sign(f(0.5 * (x0 + root)))
        far = np.sign(f(0.5 * (root + x1)))
        if near == 0 or near == far:
            raise NoUniqueRootError("el núcleo no cambia de signo")
        return float(near), float(far)

    def _polish(self, f: Poly, g, root: float, ref: float, x0: float, x1: float) -> float:
        best, best_value = root, abs(g(root))
        for _ in range(2):
            scaled, log_weight = self.scaled_poly_integral(P.polymulx(f.array), best, [x0], [x1])
            slope = -2.0 * float(scaled[0] * np.exp(log_weight[0] + 2.0 * best * ref)) + 2.0 * ref * g(best)
            if slope == 0.0:
                break
            candidate = best - g(best) / slope
            candidate_value = abs(g(candidate))
            if candidate_value >= best_value:
                break
            best, best_value = candidate, candidate_value
        return best

    def _check_degree(self, f: Poly) -> None:
        if f.degree > MAX_DEGREE:
            raise InvalidInputError(f"grado {f.degree} mayor que {MAX_DEGREE}")
