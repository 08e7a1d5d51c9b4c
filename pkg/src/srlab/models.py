"""Closed-form eigenfunctions on the unit disc, the round sphere and the flat torus."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .specfun import (
    BracketError,
    DomainError,
    bessel_j,
    bessel_j_deriv,
    bessel_j_second_deriv,
    bessel_zero,
    bessel_zero_nearest,
)

__all__ = [
    "ModelId",
    "EigenfunctionSpec",
    "FamilySpec",
    "FamilyError",
    "disc_eigenfunction",
    "sphere_highest_weight",
    "torus_plane_wave",
    "evaluate",
    "evaluate_gradient",
    "laplacian_residual",
    "whispering_family",
    "family_members",
    "sphere_norm_sq_over_pi",
    "sphere_meridian_neumann_sq_over_pi",
    "log_sphere_norm_sq",
]

SPHERE_MAX_DEGREE = 500


class ModelId(str, enum.Enum):
    DISC = "disc"
    SPHERE = "sphere"
    TORUS = "torus"

    @property
    def volume_form(self) -> str:
        return {
            "disc": "r dr dtheta",
            "sphere": "sin(phi) dphi dtheta",
            "torus": "dx1 dx2",
        }[self.value]

    @property
    def description(self) -> str:
        return {
            "disc": "unit disc, Dirichlet boundary",
            "sphere": "round unit 2-sphere",
            "torus": "flat square torus of side 2pi",
        }[self.value]


class FamilyError(ValueError):
    """A family member could not be constructed."""


@dataclass(frozen=True)
class EigenfunctionSpec:
    """A normalized closed-form eigenfunction; lam**2 is the Laplace eigenvalue."""

    model: ModelId
    quantum: tuple[int, ...]
    lam: float
    norm_const: float
    h: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "h", 1.0 / self.lam)

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "quantum": list(self.quantum),
            "lam": self.lam,
            "h": self.h,
            "norm_const": self.norm_const,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EigenfunctionSpec":
        return cls(ModelId(d["model"]), tuple(d["quantum"]), d["lam"], d["norm_const"])


def disc_eigenfunction(n: int, k: int) -> EigenfunctionSpec:
    """c e^{in theta} J_n(lam r) on the unit disc with lam = j_{n,k}."""
    lam = bessel_zero(n, k)
    c = 1.0 / (math.sqrt(math.pi) * abs(bessel_j(n + 1, lam)))
    return EigenfunctionSpec(ModelId.DISC, (n, k), lam, c)


def log_sphere_norm_sq(k: int) -> float:
    """log ||u_k||^2 with ||u_k||^2 = 4 pi prod_{j=1}^k 2j/(2j+1)."""
    return math.log(4.0 * math.pi) + sum(math.log(2 * j / (2 * j + 1)) for j in range(1, k + 1))


def sphere_norm_sq_over_pi(k: int) -> Fraction:
    """||u_k||^2_{L^2(S^2)} / pi as an exact rational."""
    out = Fraction(4)
    for j in range(1, k + 1):
        out *= Fraction(2 * j, 2 * j + 1)
    return out


def sphere_meridian_neumann_sq_over_pi(k: int) -> Fraction:
    """||X u_k||^2_{L^2(H)} / pi on the meridian, exact.

    For k >= 2 this is k^2 prod_{j=2}^{k-1} (2j-1)/(2j); the product form
    degenerates at k = 1 where X u_1 = 1 and the value is 2pi.
    """
    if k == 1:
        return Fraction(2)
    out = Fraction(k * k)
    for j in range(2, k):
        out *= Fraction(2 * j - 1, 2 * j)
    return out


def sphere_highest_weight(k: int) -> EigenfunctionSpec:
    """Normalized u_k = i^k sin^k(phi) e^{-ik theta}, eigenvalue k(k+1)."""
    if int(k) != k or not 1 <= k <= SPHERE_MAX_DEGREE:
        raise DomainError(f"sphere degree must be in [1, {SPHERE_MAX_DEGREE}], got {k}")
    c = math.exp(-0.5 * log_sphere_norm_sq(k))
    return EigenfunctionSpec(ModelId.SPHERE, (k,), math.sqrt(k * (k + 1)), c)


def torus_plane_wave(m1: int, m2: int) -> EigenfunctionSpec:
    """(2pi)^{-1} e^{i(m1 x1 + m2 x2)} on the torus [0, 2pi)^2."""
    if m1 == 0 and m2 == 0:
        raise DomainError("torus frequency vector must be nonzero")
    return EigenfunctionSpec(ModelId.TORUS, (int(m1), int(m2)), math.hypot(m1, m2), 1.0 / (2.0 * math.pi))


# ---------------------------------------------------------------------------
# Pointwise evaluation. Points: disc (r, theta); sphere (phi, theta); torus (x1, x2).


def _check_point(spec: EigenfunctionSpec, a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if spec.model is ModelId.DISC and (np.any(a <= 0) or np.any(a > 1)):
        raise DomainError("disc points need 0 < r <= 1")
    if spec.model is ModelId.SPHERE and (np.any(a <= 0) or np.any(a >= np.pi)):
        raise DomainError("sphere points need 0 < phi < pi (chart excludes the poles)")
    return a, b


def evaluate(spec: EigenfunctionSpec, a, b):
    """Value of the normalized eigenfunction at the point (a, b) of the model chart."""
    if spec.model is ModelId.DISC and np.all(np.asarray(a) == 0):
        n = spec.quantum[0]
        return spec.norm_const * (1.0 if n == 0 else 0.0) * np.exp(1j * n * np.asarray(b, dtype=float))
    a, b = _check_point(spec, a, b)
    c = spec.norm_const
    if spec.model is ModelId.DISC:
        n = spec.quantum[0]
        return c * bessel_j(n, spec.lam * a) * np.exp(1j * n * b)
    if spec.model is ModelId.SPHERE:
        k = spec.quantum[0]
        return c * 1j**k * np.sin(a) ** k * np.exp(-1j * k * b)
    m1, m2 = spec.quantum
    return c * np.exp(1j * (m1 * a + m2 * b))


def evaluate_gradient(spec: EigenfunctionSpec, a, b):
    """Gradient components in the orthonormal frame of the model metric.

    disc: (d_r, r^{-1} d_theta); sphere: (d_phi, sin(phi)^{-1} d_theta); torus: (d_x1, d_x2).
    """
    a, b = _check_point(spec, a, b)
    c = spec.norm_const
    if spec.model is ModelId.DISC:
        n = spec.quantum[0]
        lam = spec.lam
        e = np.exp(1j * n * b)
        return (c * lam * bessel_j_deriv(n, lam * a) * e, c * 1j * n / a * bessel_j(n, lam * a) * e)
    if spec.model is ModelId.SPHERE:
        k = spec.quantum[0]
        e = 1j**k * np.exp(-1j * k * b)
        return (c * k * np.sin(a) ** (k - 1) * np.cos(a) * e, c * (-1j * k) * np.sin(a) ** (k - 1) * e)
    m1, m2 = spec.quantum
    v = c * np.exp(1j * (m1 * a + m2 * b))
    return (1j * m1 * v, 1j * m2 * v)


def laplacian_residual(spec: EigenfunctionSpec, a, b):
    """|(-Delta - lam^2) phi| at the point, from closed-form second derivatives."""
    a, b = _check_point(spec, a, b)
    c = spec.norm_const
    lam2 = spec.lam**2
    if spec.model is ModelId.DISC:
        n = spec.quantum[0]
        lam = spec.lam
        x = lam * a
        f = bessel_j(n, x)
        fr = lam * bessel_j_deriv(n, x)
        frr = lam * lam * bessel_j_second_deriv(n, x)
        lap = frr + fr / a - n * n * f / (a * a)
        return np.abs(c * (-lap - lam2 * f))
    if spec.model is ModelId.SPHERE:
        k = spec.quantum[0]
        s, co = np.sin(a), np.cos(a)
        f = s**k
        # (1/sin) d_phi (sin d_phi f) with d_phi f = k s^{k-1} co
        fpp = k * (k - 1) * s ** (k - 2) * co * co - k * s**k
        fp = k * s ** (k - 1) * co
        lap = fpp + co / s * fp - k * k * f / (s * s)
        return np.abs(c * (-lap - lam2 * f))
    m1, m2 = spec.quantum
    return np.abs(c * ((m1 * m1 + m2 * m2) - lam2)) * np.ones_like(a)


# ---------------------------------------------------------------------------
# Families


@dataclass(frozen=True)
class FamilySpec:
    """An indexed family of eigenfunctions.

    kind: disc-whispering | disc-fixed-angular-fraction | sphere-highest-weight |
    torus-direction. ``indices`` is the inclusive (start, stop, step) range of the
    family index (n for disc, k for sphere, t for torus).
    """

    kind: str
    indices: tuple[int, int, int]
    r0: float = 0.5
    offset_exponent: float = 2.0 / 3.0
    offset: float = 1.0
    direction: tuple[int, int, int, int] = (1, 0, 1, 1)  # torus m = (a t + b, c t + d)

    def __post_init__(self):
        kinds = ("disc-whispering", "disc-fixed-angular-fraction", "sphere-highest-weight", "torus-direction")
        if self.kind not in kinds:
            raise ValueError(f"unknown family kind {self.kind!r}")
        start, stop, step = self.indices
        if step < 1 or stop < start:
            raise ValueError("family index range is empty")
        if not 0 < self.r0 < 1:
            raise ValueError("r0 must lie in (0, 1)")
        if not 0 < self.offset_exponent < 1:
            raise ValueError("offset exponent must lie in (0, 1)")
        if self.kind.startswith("disc") and self.offset <= 0:
            raise ValueError("offset constant z must be positive")

    @property
    def index_values(self) -> list[int]:
        start, stop, step = self.indices
        return list(range(start, stop + 1, step))

    def describe(self) -> dict:
        d = {"kind": self.kind, "indices": list(self.indices)}
        if self.kind.startswith("disc"):
            d.update(r0=self.r0, offset_exponent=self.offset_exponent, offset=self.offset)
        if self.kind == "torus-direction":
            d["direction"] = list(self.direction)
        return d


def _whispering_target(n: int, r0: float, dprime: float, z: float) -> float:
    lam = n / r0
    for _ in range(50):
        new = (n / r0) / (1.0 + z * lam ** (-dprime))
        if abs(new - lam) <= 1e-10 * lam:
            return new
        lam = new
    return lam


def whispering_member(n: int, r0: float, dprime: float, z: float) -> tuple[EigenfunctionSpec, float]:
    """Disc mode of angular order n whose tangential frequency on r = r0 is 1 + z_eff h^dprime."""
    target = _whispering_target(n, r0, dprime, z)
    try:
        k, lam = bessel_zero_nearest(n, target)
    except (BracketError, DomainError) as exc:
        raise FamilyError(f"n={n}: {exc}") from exc
    h = 1.0 / lam
    z_eff = (n * h / r0 - 1.0) / h**dprime
    slack = 4.0 / (lam * h**dprime * r0)
    if abs(z_eff - z) > slack:
        raise FamilyError(f"n={n}: nearest zero gives z_eff={z_eff:.4g}, outside z +/- {slack:.3g}")
    spec = EigenfunctionSpec(ModelId.DISC, (n, k), lam, 1.0 / (math.sqrt(math.pi) * abs(bessel_j(n + 1, lam))))
    return spec, z_eff


def whispering_family(r0: float, dprime: float, z: float, n_range) -> list[tuple[EigenfunctionSpec, float]]:
    if not 0 < r0 < 1:
        raise ValueError("r0 must lie in (0, 1)")
    if not 0 < dprime < 1:
        raise ValueError("offset exponent must lie in (0, 1)")
    if z <= 0:
        raise ValueError("offset constant z must be positive")
    return [whispering_member(n, r0, dprime, z) for n in n_range]


def family_member(family: FamilySpec, index: int) -> tuple[EigenfunctionSpec, dict]:
    """One member of ``family`` plus per-member metadata."""
    if family.kind == "disc-whispering":
        spec, z_eff = whispering_member(index, family.r0, family.offset_exponent, family.offset)
        return spec, {"index": index, "z_eff": z_eff}
    if family.kind == "disc-fixed-angular-fraction":
        # n/lam held near r0: zero nearest n / r0.
        try:
            k, lam = bessel_zero_nearest(index, index / family.r0)
        except (BracketError, DomainError) as exc:
            raise FamilyError(f"n={index}: {exc}") from exc
        return disc_eigenfunction(index, k), {"index": index}
    if family.kind == "sphere-highest-weight":
        return sphere_highest_weight(index), {"index": index}
    a, b, c, d = family.direction
    return torus_plane_wave(a * index + b, c * index + d), {"index": index}


def family_members(family: FamilySpec):
    """Yield (index, spec | FamilyError, metadata) for every family index in order."""
    for i in family.index_values:
        try:
            spec, meta = family_member(family, i)
        except FamilyError as exc:
            yield i, exc, {"index": i}
            continue
        yield i, spec, meta
