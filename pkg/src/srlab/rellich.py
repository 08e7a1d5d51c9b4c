"""Rellich commutator identity on the disc and the windowed energy balance on H.

With A = chi_c(r - r0) h D_r and P = -h^2 Delta - 1, Green's formula over
M_- = {r < r0} gives

    (i/h) int_{M_-} ([P, A] phi) conj(phi) dx
        = int_H ((h D_r)^2 phi) conj(phi) + int_H |h D_r phi|^2,

with the normal pointing out of M_- (increasing r).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .models import EigenfunctionSpec, ModelId
from .specfun import gauss_legendre, bessel_j, bessel_j_deriv, bessel_j_second_deriv
from .traces import Trace, norm_l2, restrict, disc_circle
from .windows import bump_derivatives, energy_split, tangential_energy

__all__ = [
    "RellichReport",
    "ConvergenceError",
    "energy_balance",
    "commutator_lhs_disc",
    "boundary_rhs_disc",
    "curvature_correction_disc",
    "rellich_closure_disc",
    "collar_cutoff",
]

MIN_NODES = 64
MAX_NODES = 4096


class ConvergenceError(ArithmeticError):
    """Radial quadrature did not settle under node doubling."""


@dataclass
class RellichReport:
    h: float
    delta: float
    T_tan: float
    T_neu: float
    T_in: float
    T_tan_mid: float
    T_out: float
    balance: float
    within_bound: bool | None = None
    commutator_lhs: float | None = None
    boundary_rhs: float | None = None
    closure_residual: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RellichReport":
        return cls(**d)


def energy_balance(trace: Trace, delta: float = 0.6, bound: float | None = None) -> RellichReport:
    """Tangential energy, Neumann energy and their windowed split on H."""
    split = energy_split(trace, delta)
    t_tan = tangential_energy(trace)
    t_neu = norm_l2(trace, "neumann", "parseval") ** 2
    balance = t_tan + t_neu
    return RellichReport(
        h=trace.h,
        delta=delta,
        T_tan=t_tan,
        T_neu=t_neu,
        T_in=split["in"],
        T_tan_mid=split["tan"],
        T_out=split["out"],
        balance=balance,
        within_bound=None if bound is None else bool(balance <= bound),
    )


def collar_cutoff(eps: float) -> Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """chi_c(t) = chi(t / eps) with its first two t-derivatives."""

    def cutoff(t):
        c0, c1, c2 = bump_derivatives(np.asarray(t, dtype=float) / eps)
        return c0, c1 / eps, c2 / eps**2

    return cutoff


def _radial(spec: EigenfunctionSpec, r):
    """f, f', f'' for f(r) = J_n(lam r), derivatives from Bessel recurrences."""
    n = spec.quantum[0]
    lam = spec.lam
    x = lam * np.asarray(r, dtype=float)
    return bessel_j(n, x), lam * bessel_j_deriv(n, x), lam * lam * bessel_j_second_deriv(n, x)


def _check_disc(spec: EigenfunctionSpec, r0: float, eps: float | None = None):
    if spec.model is not ModelId.DISC:
        raise ValueError("the Rellich volume side is only available for disc eigenfunctions")
    if not 0 < r0 < 1:
        raise ValueError("r0 must lie in (0, 1)")
    if eps is not None and not 0 < eps < min(r0, 1 - r0):
        raise ValueError("collar half-width must satisfy 0 < eps < min(r0, 1 - r0)")


def _commutator_integral(spec, r0, eps, cutoff, nodes):
    n = spec.quantum[0]
    h = spec.h
    total = 0.0
    # chi_c is constant on |t| <= eps/2; split there so each panel is smooth.
    for a, b in ((r0 - eps, r0 - 0.5 * eps), (r0 - 0.5 * eps, r0)):
        x, w = gauss_legendre(nodes)
        r = 0.5 * (b - a) * x + 0.5 * (b + a)
        w = 0.5 * (b - a) * w
        c0, c1, c2 = cutoff(r - r0)
        f, fr, frr = _radial(spec, r)
        # [Delta, chi d_r] u = chi (u_r / r^2 + 2 u_thth / r^3) + 2 chi' u_rr + chi'' u_r + chi' u_r / r
        comm = c0 * (fr / r**2 - 2.0 * n * n * f / r**3) + 2.0 * c1 * frr + c2 * fr + c1 * fr / r
        total += float(np.sum(w * comm * f * r))
    # (i/h)[P, A] = -h^2 [Delta, chi d_r]; exact angular integral gives 2 pi.
    return -(h**2) * 2.0 * math.pi * spec.norm_const**2 * total


def commutator_lhs_disc(spec: EigenfunctionSpec, r0: float, eps: float, cutoff=None) -> float:
    """(i/h) int_{r < r0} ([P, chi_c h D_r] phi) conj(phi) dx by Gauss-Legendre in r.

    Radial nodes start at 64 and double until successive values agree to
    1e-8 relative; ConvergenceError past 4096 nodes.
    """
    _check_disc(spec, r0, eps)
    cutoff = cutoff or collar_cutoff(eps)
    nodes = MIN_NODES
    prev = _commutator_integral(spec, r0, eps, cutoff, nodes)
    while nodes < MAX_NODES:
        nodes *= 2
        cur = _commutator_integral(spec, r0, eps, cutoff, nodes)
        if abs(cur - prev) <= 1e-8 * max(abs(cur), 1e-300) or cur == prev:
            return cur
        prev = cur
    raise ConvergenceError(f"commutator integral unsettled at {MAX_NODES} radial nodes")


def boundary_rhs_disc(spec: EigenfunctionSpec, r0: float) -> float:
    """int_H ((h D_r)^2 phi) conj(phi) + int_H |h D_r phi|^2 from closed forms."""
    _check_disc(spec, r0)
    f, fr, frr = _radial(spec, r0)
    h = spec.h
    return float(2.0 * math.pi * r0 * spec.norm_const**2 * (-(h**2) * frr * f + h**2 * fr**2))


def curvature_correction_disc(spec: EigenfunctionSpec, r0: float) -> float:
    """int_H ((h D_r)^2 phi) conj(phi) minus the tangential energy.

    On eigenfunctions (h D_r)^2 = 1 + h^2 r^{-1} d_r + h^2 r^{-2} d_theta^2,
    leaving the first-order term (h^2 / r0) int_H (d_r phi) conj(phi).
    """
    if spec.model is ModelId.TORUS:
        return 0.0
    _check_disc(spec, r0)
    f, fr, _ = _radial(spec, r0)
    return float(2.0 * math.pi * r0 * spec.norm_const**2 * spec.h**2 / r0 * fr * f)


def rellich_closure_disc(spec: EigenfunctionSpec, r0: float = 0.5, eps: float = 0.2, delta: float = 0.6) -> RellichReport:
    """Energy balance on r = r0 together with both sides of the Rellich identity."""
    report = energy_balance(restrict(spec, disc_circle(r0)), delta)
    lhs = commutator_lhs_disc(spec, r0, eps)
    rhs = boundary_rhs_disc(spec, r0)
    report.commutator_lhs = lhs
    report.boundary_rhs = rhs
    report.closure_residual = abs(lhs - rhs)
    return report
