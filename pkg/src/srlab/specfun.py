"""Special functions and numerical primitives.

Integer-order Bessel J (Miller backward recurrence), Bessel zeros, the Airy
function Ai, periodic-trapezoid and Gauss-Legendre quadrature, and discrete
Fourier analysis on a uniform periodic grid.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "BracketError",
    "QuadratureRule",
    "gauss_legendre",
    "FourierSeries",
    "bessel_j",
    "bessel_j_deriv",
    "bessel_j_second_deriv",
    "bessel_j_integral",
    "bessel_zero",
    "bessel_zero_nearest",
    "airy_ai",
    "airy_zero",
    "integrate",
    "analyze_fourier",
    "synthesize",
]

BESSEL_MAX_ORDER = 2000
AIRY_MAX_ABS = 30.0

_AI0 = 0.355028053887817239260063186004  # Ai(0)
_AIP0 = 0.258819403792806798405183560189  # -Ai'(0)
_RESCALE = 1e250
_RESCALE_LOG = math.log(_RESCALE)


class DomainError(ValueError):
    """Argument outside the supported evaluation envelope."""


class BracketError(ArithmeticError):
    """A root could not be bracketed (usually an envelope violation)."""


# ---------------------------------------------------------------------------
# Bessel J


def _check_envelope(n: int, x) -> None:
    if int(n) != n or n < 0 or n > BESSEL_MAX_ORDER:
        raise DomainError(f"Bessel order must be an integer in [0, {BESSEL_MAX_ORDER}], got {n}")
    xa = np.asarray(x, dtype=float)
    if xa.size and (np.any(~np.isfinite(xa)) or xa.min() < 0.0 or xa.max() > 10.0 * (n + 1)):
        raise DomainError(f"Bessel argument outside [0, 10*(n+1)] for n={n}")


def _start_index(m: float) -> int:
    start = int(m + 20 + math.sqrt(160.0 * (m + 1.0)))
    return start + (start % 2)


def _miller_scalar(orders: Sequence[int], x: float) -> dict[int, float]:
    """J_m(x) for each m in ``orders`` (all >= 0), x > 0."""
    top = max(orders)
    start = _start_index(max(top, x))
    wanted = set(orders)
    rec: dict[int, tuple[float, int]] = {}
    two_over_x = 2.0 / x
    jp1, j = 0.0, 1e-30
    norm = 0.0
    scale = 0
    for k in range(start, 0, -1):
        if k in wanted:
            rec[k] = (j, scale)
        if k % 2 == 0:
            norm += 2.0 * j
        jm1 = k * two_over_x * j - jp1
        jp1, j = j, jm1
        if abs(j) > _RESCALE:
            j /= _RESCALE
            jp1 /= _RESCALE
            norm /= _RESCALE
            scale += 1
    if 0 in wanted:
        rec[0] = (j, scale)
    norm += j
    log_norm = math.log(abs(norm))
    out = {}
    for m in orders:
        val, s = rec[m]
        if val == 0.0:
            out[m] = 0.0
            continue
        logv = math.log(abs(val)) - (scale - s) * _RESCALE_LOG - log_norm
        out[m] = math.copysign(math.exp(logv), val * norm) if logv > -745.0 else 0.0
    return out


def _miller_vector(orders: Sequence[int], x: np.ndarray) -> dict[int, np.ndarray]:
    top = max(orders)
    start = _start_index(max(top, float(x.max())))
    wanted = set(orders)
    rec: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    two_over_x = 2.0 / x
    jp1 = np.zeros_like(x)
    j = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    scale = np.zeros(x.shape, dtype=np.int64)
    for k in range(start, 0, -1):
        if k in wanted:
            rec[k] = (j.copy(), scale.copy())
        if k % 2 == 0:
            norm += 2.0 * j
        jm1 = k * two_over_x * j - jp1
        jp1, j = j, jm1
        big = np.abs(j) > _RESCALE
        if big.any():
            j[big] /= _RESCALE
            jp1[big] /= _RESCALE
            norm[big] /= _RESCALE
            scale[big] += 1
    if 0 in wanted:
        rec[0] = (j.copy(), scale.copy())
    norm += j
    log_norm = np.log(np.abs(norm))
    out = {}
    with np.errstate(divide="ignore"):
        for m in orders:
            val, s = rec[m]
            logv = np.log(np.abs(val)) - (scale - s) * _RESCALE_LOG - log_norm
            res = np.sign(val) * np.sign(norm) * np.exp(np.maximum(logv, -800.0))
            res[(logv <= -745.0) | (val == 0.0)] = 0.0
            out[m] = res
    return out


def _bessel_orders(orders: Sequence[int], x):
    """Evaluate J_m(x) for several nonnegative orders at once."""
    scalar = np.ndim(x) == 0
    if scalar:
        xf = float(x)
        if xf == 0.0:
            return {m: (1.0 if m == 0 else 0.0) for m in orders}
        return _miller_scalar(orders, xf)
    xa = np.asarray(x, dtype=float)
    out = {m: np.zeros_like(xa) for m in orders}
    pos = xa > 0.0
    if 0 in out:
        out[0][~pos] = 1.0
    if pos.any():
        vals = _miller_vector(orders, xa[pos])
        for m in orders:
            out[m][pos] = vals[m]
    return out


def _signed(orders_needed: Sequence[int]):
    """Map possibly negative orders to nonnegative ones plus sign: J_{-m} = (-1)^m J_m."""
    return [(abs(m), -1.0 if (m < 0 and m % 2) else 1.0) for m in orders_needed]


def bessel_j(n: int, x):
    """J_n(x) for integer n in [0, 2000] and 0 <= x <= 10(n+1).

    Accepts a scalar or an array for ``x``. Accurate to ~1e-13 relative away
    from zeros, including deep in the evanescent region x << n.
    """
    _check_envelope(n, x)
    return _bessel_orders([n], x)[n]


def bessel_j_deriv(n: int, x):
    """J_n'(x) = (J_{n-1}(x) - J_{n+1}(x))/2, and -J_1(x) for n = 0."""
    _check_envelope(n, x)
    if n == 0:
        return -_bessel_orders([1], x)[1]
    v = _bessel_orders([n - 1, n + 1], x)
    return 0.5 * (v[n - 1] - v[n + 1])


def bessel_j_second_deriv(n: int, x):
    """J_n''(x) = (J_{n-2}(x) - 2 J_n(x) + J_{n+2}(x))/4."""
    _check_envelope(n, x)
    signed = _signed([n - 2, n, n + 2])
    v = _bessel_orders(sorted({m for m, _ in signed}), x)
    (a, sa), (b, _), (c, _) = signed
    return 0.25 * (sa * v[a] - 2.0 * v[b] + v[c])


def bessel_j_integral(n: int, x: float, nodes: int | None = None) -> float:
    """J_n(x) from (1/2pi) int_0^{2pi} cos(n t - x sin t) dt by the periodic trapezoid rule.

    Independent of the recurrence path; loses relative accuracy once
    |J_n(x)| drops far below 1 (absolute error ~1e-16).
    """
    _check_envelope(n, x)
    m = nodes or max(256, int(16 * (n + x)))
    t = 2.0 * np.pi * np.arange(m) / m
    return float(np.mean(np.cos(n * t - x * np.sin(t))))


# ---------------------------------------------------------------------------
# Airy Ai


def _airy_maclaurin(z: float) -> float:
    z3 = z * z * z
    f, g = 1.0, z
    tf, tg = 1.0, z
    k = 1
    while True:
        tf *= z3 / ((3 * k - 1) * (3 * k))
        tg *= z3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        if abs(tf) < 1e-18 * abs(f) and abs(tg) < 1e-18 * max(abs(g), 1e-300) and k > 3:
            break
        k += 1
        if k > 500:
            break
    return _AI0 * f - _AIP0 * g


_GL_AIRY = np.polynomial.legendre.leggauss(256)


def _airy_laplace(z: float) -> float:
    """Ai(z) = exp(-zeta)/pi * int_0^inf exp(-sqrt(z) t^2) cos(t^3/3) dt, z > 0."""
    zeta = 2.0 / 3.0 * z**1.5
    top = math.sqrt(40.0 / math.sqrt(z))
    t, w = _GL_AIRY
    t = 0.5 * top * (t + 1.0)
    w = 0.5 * top * w
    val = float(np.sum(w * np.exp(-math.sqrt(z) * t * t) * np.cos(t**3 / 3.0)))
    return math.exp(-zeta) / math.pi * val


def _airy_oscillatory(z: float) -> float:
    """Large negative z: Ai(-x) ~ pi^{-1/2} x^{-1/4} [sin(w) P - cos(w) Q], w = zeta + pi/4."""
    x = -z
    zeta = 2.0 / 3.0 * x**1.5
    p, q = 0.0, 0.0
    u = 1.0
    last = math.inf
    k = 0
    while True:
        term = u / zeta**k
        if abs(term) > last or abs(term) < 1e-17:
            break
        last = abs(term)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p += sign * term
        else:
            q += sign * term
        k += 1
        u *= (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
    w = zeta + math.pi / 4.0
    return (math.sin(w) * p - math.cos(w) * q) / (math.sqrt(math.pi) * x**0.25)


def airy_ai(z: float) -> float:
    """Airy function Ai(z) for |z| <= 30."""
    z = float(z)
    if not math.isfinite(z) or abs(z) > AIRY_MAX_ABS:
        raise DomainError(f"airy_ai requires |z| <= {AIRY_MAX_ABS}, got {z}")
    if z > 1.0:
        return _airy_laplace(z)
    if z >= -7.0:
        return _airy_maclaurin(z)
    return _airy_oscillatory(z)


def airy_zero(k: int) -> float:
    """k-th zero a_k < 0 of Ai: asymptotic guess polished by secant steps."""
    if int(k) != k or k < 1:
        raise DomainError(f"Airy zero index must be >= 1, got {k}")
    t = 3.0 * math.pi * (4 * k - 1) / 8.0
    x0 = -(t ** (2.0 / 3.0)) * (1 + 5.0 / 48.0 / t**2 - 5.0 / 36.0 / t**4)
    if x0 < -AIRY_MAX_ABS:
        return x0
    x1 = x0 * (1 + 1e-4)
    f0, f1 = airy_ai(x0), airy_ai(x1)
    for _ in range(30):
        if f1 == f0:
            break
        x0, x1 = x1, x1 - f1 * (x1 - x0) / (f1 - f0)
        f0, f1 = f1, airy_ai(x1)
        if abs(x1 - x0) <= 1e-15 * abs(x1):
            break
    return x1


# ---------------------------------------------------------------------------
# Bessel zeros


def _debye_phase(z: float) -> float:
    """sqrt(z^2 - 1) - arcsec(z) for z >= 1."""
    return math.sqrt(z * z - 1.0) - math.acos(1.0 / z)


def _uniform_zero_guess(n: int, k: int) -> float:
    # Olver's leading uniform approximation: j_{n,k} ~ n z(zeta), zeta = n^{-2/3} a_k.
    target = 2.0 / 3.0 * (-airy_zero(k) / n ** (2.0 / 3.0)) ** 1.5
    z = 1.0 + (1.5 * target) ** (2.0 / 3.0) / 2.0 ** (1.0 / 3.0)
    for _ in range(60):
        step = (_debye_phase(z) - target) * z / math.sqrt(z * z - 1.0)
        z = max(z - step, 1.0 + 0.5 * (z - 1.0))
        if abs(step) < 1e-15 * z:
            break
    return n * z


def _mcmahon_guess(n: int, k: int) -> float:
    mu = 4.0 * n * n
    b = (k + 0.5 * n - 0.25) * math.pi
    e = 8.0 * b
    return b - (mu - 1) / e - 4 * (mu - 1) * (7 * mu - 31) / (3 * e**3)


def _zero_spacing(n: int, x: float) -> float:
    if x <= n:
        return max(math.pi, 2.0 * n ** (1.0 / 3.0))
    return math.pi / math.sqrt(1.0 - (n / x) ** 2)


def _refine_zero(n: int, guess: float) -> float:
    """Safeguarded Newton iteration with bisection fallback near ``guess``."""
    half = 0.45 * _zero_spacing(n, guess)
    lo, hi = max(guess - half, 1e-8), min(guess + half, 10.0 * (n + 1))
    if hi <= lo:
        raise BracketError(f"zero of J_{n} near {guess} is outside the Bessel envelope")
    flo, fhi = bessel_j(n, lo), bessel_j(n, hi)
    if flo * fhi > 0:
        raise BracketError(f"no sign change of J_{n} in [{lo}, {hi}]")
    x = guess
    for _ in range(100):
        vals = _bessel_orders([n, n + 1] if n == 0 else [n - 1, n, n + 1], x)
        f = vals[n]
        fp = -vals[1] if n == 0 else 0.5 * (vals[n - 1] - vals[n + 1])
        if f == 0.0:
            return x
        if f * flo < 0:
            hi = x
        else:
            lo, flo = x, f
        step = f / fp if fp != 0 else math.inf
        xn = x - step
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= 4e-16 * x or hi - lo <= 4e-16 * x:
            return xn
        x = xn
    return x


def bessel_zero(n: int, k: int) -> float:
    """k-th positive zero j_{n,k} of J_n."""
    if int(k) != k or k < 1:
        raise DomainError(f"zero index must be a positive integer, got {k}")
    if int(n) != n or n < 0 or n > BESSEL_MAX_ORDER:
        raise DomainError(f"Bessel order must be an integer in [0, {BESSEL_MAX_ORDER}], got {n}")
    guess = _mcmahon_guess(n, k) if (n == 0 or k > 2 * n) else _uniform_zero_guess(n, k)
    if guess > 10.0 * (n + 1):
        raise DomainError(f"j_({n},{k}) ~ {guess:.1f} lies outside the Bessel envelope")
    root = _refine_zero(n, guess)
    if abs(root - guess) > 0.5 * _zero_spacing(n, root):
        raise BracketError(f"Newton for j_({n},{k}) wandered from {guess} to {root}")
    return root


def _zero_index_estimate(n: int, x: float) -> float:
    """Continuous inverse of k -> j_{n,k}; round to get the nearest index."""
    if n == 0:
        return x / math.pi + 0.25
    if x <= n:
        return 0.0
    t = 1.5 * _debye_phase(x / n) * n
    return (8.0 * t / (3.0 * math.pi) + 1.0) / 4.0


def bessel_zero_nearest(n: int, target: float) -> tuple[int, float]:
    """(k, j_{n,k}) with j_{n,k} nearest to ``target``."""
    k0 = max(1, int(round(_zero_index_estimate(n, target))))
    cands = [(k, bessel_zero(n, k)) for k in range(max(1, k0 - 1), k0 + 2)]
    return min(cands, key=lambda kv: abs(kv[1] - target))


# ---------------------------------------------------------------------------
# Quadrature


@functools.lru_cache(maxsize=32)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached Gauss-Legendre nodes and weights on [-1, 1] (read-only arrays)."""
    t, w = np.polynomial.legendre.leggauss(n)
    t.flags.writeable = False
    w.flags.writeable = False
    return t, w


@dataclass(frozen=True)
class QuadratureRule:
    kind: str  # "periodic-trapezoid" | "gauss-legendre"
    n: int
    a: float
    b: float

    def __post_init__(self):
        if self.kind not in ("periodic-trapezoid", "gauss-legendre"):
            raise ValueError(f"unknown quadrature kind {self.kind!r}")
        if self.n < 4 and not (self.kind == "gauss-legendre" and self.n >= 1):
            raise ValueError("quadrature needs at least 4 nodes")
        if not self.b > self.a:
            raise ValueError("quadrature interval must have b > a")

    @property
    def nodes(self) -> np.ndarray:
        if self.kind == "periodic-trapezoid":
            return self.a + (self.b - self.a) * np.arange(self.n) / self.n
        t, _ = gauss_legendre(self.n)
        return 0.5 * (self.b - self.a) * t + 0.5 * (self.b + self.a)

    @property
    def weights(self) -> np.ndarray:
        if self.kind == "periodic-trapezoid":
            return np.full(self.n, (self.b - self.a) / self.n)
        _, w = gauss_legendre(self.n)
        return 0.5 * (self.b - self.a) * w


def integrate(rule: QuadratureRule, f: Callable | np.ndarray):
    """Apply ``rule`` to a vectorized integrand or to samples at ``rule.nodes``."""
    if callable(f):
        values = np.asarray(f(rule.nodes))
    else:
        values = np.asarray(f)
        if values.shape[0] != rule.n:
            raise ValueError(f"expected {rule.n} samples, got {values.shape[0]}")
    return np.tensordot(rule.weights, values, axes=(0, 0))


# ---------------------------------------------------------------------------
# Fourier analysis


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Coefficients a_m of sum_m a_m exp(2 pi i m s / period), m in [-N/2, N/2)."""

    coefficients: np.ndarray
    period: float

    @property
    def size(self) -> int:
        return len(self.coefficients)

    @property
    def modes(self) -> np.ndarray:
        half = self.size // 2
        return np.arange(-half, self.size - half)

    def coefficient(self, m: int) -> complex:
        idx = m + self.size // 2
        if not 0 <= idx < self.size:
            return 0j
        return complex(self.coefficients[idx])

    def norm_sq(self) -> float:
        return float(self.period * np.sum(np.abs(self.coefficients) ** 2))


def analyze_fourier(samples, period: float) -> FourierSeries:
    samples = np.asarray(samples, dtype=complex)
    n = len(samples)
    if n < 8 or n % 2:
        raise ValueError(f"grid size must be even and >= 8, got {n}")
    if not period > 0:
        raise ValueError("period must be positive")
    coeffs = np.fft.fftshift(np.fft.fft(samples)) / n
    return FourierSeries(coeffs, float(period))


def synthesize(series: FourierSeries, n: int | None = None) -> np.ndarray:
    """Samples on an ``n``-point grid; modes outside [-n/2, n/2) are dropped."""
    n = series.size if n is None else n
    if n < 8 or n % 2:
        raise ValueError(f"grid size must be even and >= 8, got {n}")
    full = np.zeros(n, dtype=complex)
    for m, a in zip(series.modes, series.coefficients):
        if -n // 2 <= m < n // 2 and a != 0:
            full[m + n // 2] += a
    return np.fft.ifft(np.fft.ifftshift(full)) * n
