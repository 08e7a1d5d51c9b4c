"""Rescaled interior / glancing / exterior cutoffs as Fourier multipliers on H.

Each window multiplies the mode-m coefficient of a trace by
chi_w((R(m) - 1) / h^delta). The three cutoffs sum to one pointwise, so the
decomposition reproduces the trace exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import FourierSeries, synthesize
from .traces import Trace, symbol_values

__all__ = [
    "CutoffProfile",
    "WindowDecomposition",
    "smooth_step",
    "bump",
    "bump_derivatives",
    "cutoff_eval",
    "window_multipliers",
    "window_decompose",
    "exterior_mass",
    "tangential_energy",
    "energy_split",
    "WINDOWS",
]

WINDOWS = ("in", "tan", "out")


def _s(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    a = _s(t)
    b = _s(1.0 - np.asarray(t, dtype=float))
    return a / (a + b)


def bump(u):
    """chi(u): 1 on |u| <= 1/2, 0 on |u| >= 1."""
    return 1.0 - smooth_step(2.0 * np.abs(np.asarray(u, dtype=float)) - 1.0)


def _s_derivs(t):
    t = np.asarray(t, dtype=float)
    s0 = _s(t)
    d1 = np.zeros_like(t)
    d2 = np.zeros_like(t)
    pos = t > 0
    tp = t[pos]
    d1[pos] = s0[pos] / tp**2
    d2[pos] = s0[pos] * (1.0 / tp**4 - 2.0 / tp**3)
    return s0, d1, d2


def bump_derivatives(u):
    """(chi, chi', chi'') evaluated at u."""
    u = np.asarray(u, dtype=float)
    sign = np.sign(u)
    t = 2.0 * np.abs(u) - 1.0
    a, a1, a2 = _s_derivs(t)
    b, b1, b2 = _s_derivs(1.0 - t)
    # g = a / (a + b) with b(t) = s(1 - t): b' = -s'(1-t), b'' = s''(1-t)
    b1, b2 = -b1, b2
    den = a + b
    g = a / den
    g1 = (a1 * b - a * b1) / den**2
    g2 = ((a2 * b - a * b2) * den - 2.0 * (a1 * b - a * b1) * (a1 + b1)) / den**3
    chi = 1.0 - g
    chi1 = -g1 * 2.0 * sign
    chi2 = -g2 * 4.0
    return chi, chi1, chi2


@dataclass(frozen=True)
class CutoffProfile:
    delta: float

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")


def cutoff_eval(profile: CutoffProfile | None, kind: str, u):
    """chi_in, chi_tan or chi_out at the rescaled argument u."""
    u = np.asarray(u, dtype=float)
    # 1 - chi taken directly from the step so tiny tails are not rounded away
    rest = smooth_step(2.0 * np.abs(u) - 1.0)
    if kind == "tan":
        out = 1.0 - rest
    elif kind == "out":
        out = np.where(u > 0, rest, 0.0)
    elif kind == "in":
        out = np.where(u < 0, rest, 0.0)
    else:
        raise ValueError(f"unknown window {kind!r}")
    return out if out.ndim else float(out)


def window_multipliers(series: FourierSeries, h: float, delta: float) -> dict[str, np.ndarray]:
    u = (symbol_values(series, h) - 1.0) / h**delta
    return {w: np.asarray(cutoff_eval(None, w, u), dtype=float) for w in WINDOWS}


def _energy(series: FourierSeries, h: float) -> float:
    weight = 1.0 - symbol_values(series, h)
    return float(series.period * np.sum(weight * np.abs(series.coefficients) ** 2))


def tangential_energy(obj, h: float | None = None) -> float:
    """L * sum_m (1 - R(m)) |a_m|^2: the quadratic form of 1 + h^2 Delta_H.

    Accepts a Trace (its Dirichlet data) or a FourierSeries together with h.
    """
    if isinstance(obj, Trace):
        return _energy(obj.dirichlet_series, obj.h)
    if h is None:
        raise ValueError("h is required when passing a bare FourierSeries")
    return _energy(obj, h)


@dataclass(frozen=True, eq=False)
class WindowDecomposition:
    delta: float
    h: float
    series: dict[str, FourierSeries]
    components: dict[str, np.ndarray]
    norms: dict[str, float] = field(default_factory=dict)
    energies: dict[str, float] = field(default_factory=dict)

    def report(self) -> dict:
        return {
            "delta": self.delta,
            "norms": {w: self.norms[w] for w in WINDOWS},
            "energies": {w: self.energies[w] for w in WINDOWS},
        }


def window_decompose(trace: Trace, delta: float) -> WindowDecomposition:
    """Split the Dirichlet trace into interior, glancing and exterior windows at scale h^delta."""
    CutoffProfile(delta)
    base = trace.dirichlet_series
    mult = window_multipliers(base, trace.h, delta)
    series = {w: FourierSeries(base.coefficients * mult[w], base.period) for w in WINDOWS}
    components = {w: synthesize(series[w], trace.size) for w in WINDOWS}
    norms = {w: math.sqrt(series[w].norm_sq()) for w in WINDOWS}
    energies = {w: _energy(series[w], trace.h) for w in WINDOWS}
    return WindowDecomposition(delta, trace.h, series, components, norms, energies)


def energy_split(trace: Trace, delta: float) -> dict[str, float]:
    """L * sum_m (1 - R) chi_w |a_m|^2 per window.

    Linear in the multipliers, so the three parts add up to the full
    tangential energy; the interior part is nonnegative because chi_in
    vanishes wherever R >= 1.
    """
    CutoffProfile(delta)
    base = trace.dirichlet_series
    mult = window_multipliers(base, trace.h, delta)
    weight = (1.0 - symbol_values(base, trace.h)) * np.abs(base.coefficients) ** 2
    return {w: float(base.period * np.sum(mult[w] * weight)) for w in WINDOWS}


def exterior_mass(trace: Trace, delta: float) -> float:
    """||u_out||_{L^2(H)}: mass of the trace beyond the coball edge at scale h^delta."""
    CutoffProfile(delta)
    base = trace.dirichlet_series
    u = (symbol_values(base, trace.h) - 1.0) / trace.h**delta
    chi_out = np.asarray(cutoff_eval(None, "out", u), dtype=float)
    return math.sqrt(base.period * float(np.sum((chi_out * np.abs(base.coefficients)) ** 2)))
