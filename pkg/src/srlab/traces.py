"""Restriction of model eigenfunctions to closed curves H.

A Trace holds the Dirichlet data phi|_H and the normalized Neumann data
h d_nu phi|_H sampled on a uniform arclength grid, together with their
Fourier coefficients in the modes exp(2 pi i m s / L).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import EigenfunctionSpec, ModelId
from .specfun import FourierSeries, bessel_j, bessel_j_deriv, synthesize

__all__ = [
    "Hypersurface",
    "Trace",
    "ModeSymbol",
    "BandLimitError",
    "disc_circle",
    "sphere_meridian",
    "sphere_equator",
    "torus_line",
    "band_limit",
    "default_grid",
    "restrict",
    "norm_l2",
    "mode_symbols",
    "symbol_values",
]


class BandLimitError(ValueError):
    """Grid too coarse for the trace's active modes, or model/curve mismatch."""


@dataclass(frozen=True)
class Hypersurface:
    """A closed curve in a model geometry; normals point out of M_-.

    disc-circle: r = r0, normal d_r. sphere-meridian: theta frozen at 0 with
    phi in [0, 2pi), normal X = sin(phi)^{-1} d_theta. sphere-equator:
    phi = pi/2, normal d_phi. torus-line: x2 = c, normal d_x2.
    """

    model: ModelId
    kind: str
    param: float = 0.0

    def __post_init__(self):
        allowed = {
            "disc-circle": ModelId.DISC,
            "sphere-meridian": ModelId.SPHERE,
            "sphere-equator": ModelId.SPHERE,
            "torus-line": ModelId.TORUS,
        }
        if allowed.get(self.kind) is not self.model:
            raise ValueError(f"curve {self.kind!r} does not live on {self.model.value}")
        if self.kind == "disc-circle" and not 0 < self.param < 1:
            raise ValueError("disc circle needs 0 < r0 < 1 (H must avoid the boundary)")

    @property
    def length(self) -> float:
        if self.kind == "disc-circle":
            return 2.0 * math.pi * self.param
        return 2.0 * math.pi

    def to_dict(self) -> dict:
        return {"model": self.model.value, "kind": self.kind, "param": self.param, "length": self.length}

    @classmethod
    def from_dict(cls, d: dict) -> "Hypersurface":
        return cls(ModelId(d["model"]), d["kind"], d["param"])


def disc_circle(r0: float) -> Hypersurface:
    return Hypersurface(ModelId.DISC, "disc-circle", float(r0))


def sphere_meridian() -> Hypersurface:
    return Hypersurface(ModelId.SPHERE, "sphere-meridian")


def sphere_equator() -> Hypersurface:
    return Hypersurface(ModelId.SPHERE, "sphere-equator")


def torus_line(c: float = 0.0) -> Hypersurface:
    return Hypersurface(ModelId.TORUS, "torus-line", float(c))


@dataclass(frozen=True)
class ModeSymbol:
    m: int
    R: float


@dataclass(frozen=True, eq=False)
class Trace:
    spec: EigenfunctionSpec
    surface: Hypersurface
    dirichlet: np.ndarray
    neumann: np.ndarray
    dirichlet_series: FourierSeries
    neumann_series: FourierSeries

    @property
    def h(self) -> float:
        return self.spec.h

    @property
    def size(self) -> int:
        return len(self.dirichlet)

    @property
    def length(self) -> float:
        return self.surface.length

    @property
    def grid(self) -> np.ndarray:
        """Arclength parameter of the sample points."""
        return self.length * np.arange(self.size) / self.size


def band_limit(spec: EigenfunctionSpec, surface: Hypersurface) -> int:
    """Largest |m| carried by the trace of ``spec`` on ``surface``."""
    if spec.model is ModelId.DISC:
        return spec.quantum[0]
    if spec.model is ModelId.SPHERE:
        return spec.quantum[0]
    return abs(spec.quantum[0])


def default_grid(spec: EigenfunctionSpec, surface: Hypersurface) -> int:
    return 4 * band_limit(spec, surface) + 16


def _meridian_coefficients(k: int, power: int, scale: complex, n: int) -> np.ndarray:
    """Coefficients of scale * sin^power(phi) on an n-point mode grid.

    sin^p = (2i)^{-p} sum_j C(p, j) (-1)^j e^{i(p - 2j) phi}; binomials in log space.
    """
    out = np.zeros(n, dtype=complex)
    half = n // 2
    base = -power * math.log(2.0)
    for j in range(power + 1):
        m = power - 2 * j
        logc = math.lgamma(power + 1) - math.lgamma(j + 1) - math.lgamma(power - j + 1) + base
        out[m + half] += scale * (-1) ** j * (1j) ** (-power) * math.exp(logc)
    return out


def restrict(spec: EigenfunctionSpec, surface: Hypersurface, n: int | None = None) -> Trace:
    """Dirichlet and normalized Neumann traces of ``spec`` on ``surface``, from closed forms."""
    if spec.model is not surface.model:
        raise BandLimitError(f"{spec.model.value} eigenfunction cannot be restricted to {surface.kind}")
    band = band_limit(spec, surface)
    n = default_grid(spec, surface) if n is None else int(n)
    if n % 2 or n < 4 * band + 8:
        raise BandLimitError(f"grid size {n} must be even and >= 4*{band}+8")
    t = 2.0 * np.pi * np.arange(n) / n  # angle parameter
    length = surface.length
    half = n // 2
    c = spec.norm_const
    h = spec.h
    dir_c = np.zeros(n, dtype=complex)
    neu_c = np.zeros(n, dtype=complex)

    if surface.kind == "disc-circle":
        order = spec.quantum[0]
        x = spec.lam * surface.param
        a = c * bessel_j(order, x)
        b = c * h * spec.lam * bessel_j_deriv(order, x)
        dir_c[order + half] = a
        neu_c[order + half] = b
        phase = np.exp(1j * order * t)
        dirichlet, neumann = a * phase, b * phase
    elif surface.kind == "sphere-meridian":
        k = spec.quantum[0]
        s = np.sin(t)
        dirichlet = c * 1j**k * s**k
        # X u_k = i^{k-1} k sin^{k-1}(phi) along theta = 0
        neumann = c * h * k * 1j ** (k - 1) * s ** (k - 1)
        dir_c = _meridian_coefficients(k, k, c * 1j**k, n)
        neu_c = _meridian_coefficients(k, k - 1, c * h * k * 1j ** (k - 1), n)
    elif surface.kind == "sphere-equator":
        k = spec.quantum[0]
        a = c * 1j**k
        dir_c[-k + half] = a
        dirichlet = a * np.exp(-1j * k * t)
        neumann = np.zeros(n, dtype=complex)
    else:
        m1, m2 = spec.quantum
        a = c * np.exp(1j * m2 * surface.param)
        b = h * 1j * m2 * a
        dir_c[m1 + half] = a
        neu_c[m1 + half] = b
        phase = np.exp(1j * m1 * t)
        dirichlet, neumann = a * phase, b * phase

    return Trace(
        spec,
        surface,
        np.asarray(dirichlet, dtype=complex),
        np.asarray(neumann, dtype=complex),
        FourierSeries(dir_c, length),
        FourierSeries(neu_c, length),
    )


def norm_l2(trace: Trace, which: str = "dirichlet", method: str = "quadrature") -> float:
    """L^2(H) norm of the Dirichlet or normalized Neumann trace."""
    if which not in ("dirichlet", "neumann"):
        raise ValueError(f"which must be 'dirichlet' or 'neumann', got {which!r}")
    if method == "quadrature":
        samples = trace.dirichlet if which == "dirichlet" else trace.neumann
        return math.sqrt(trace.length / trace.size * float(np.sum(np.abs(samples) ** 2)))
    if method == "parseval":
        series = trace.dirichlet_series if which == "dirichlet" else trace.neumann_series
        return math.sqrt(series.norm_sq())
    raise ValueError(f"method must be 'quadrature' or 'parseval', got {method!r}")


def symbol_values(series: FourierSeries, h: float) -> np.ndarray:
    """R(m) = (2 pi m h / L)^2 for every mode of ``series``."""
    return (2.0 * np.pi * series.modes * h / series.period) ** 2


def mode_symbols(trace: Trace) -> list[ModeSymbol]:
    r = symbol_values(trace.dirichlet_series, trace.h)
    return [ModeSymbol(int(m), float(v)) for m, v in zip(trace.dirichlet_series.modes, r)]


def resynthesize(trace: Trace, which: str = "dirichlet") -> np.ndarray:
    series = trace.dirichlet_series if which == "dirichlet" else trace.neumann_series
    return synthesize(series, trace.size)
