"""Family sweeps and log-log exponent fits."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .models import (
    EigenfunctionSpec,
    FamilyError,
    FamilySpec,
    ModelId,
    family_member,
    log_sphere_norm_sq,
    sphere_highest_weight,
    sphere_meridian_neumann_sq_over_pi,
    sphere_norm_sq_over_pi,
    whispering_member,
)
from .rellich import energy_balance
from .specfun import QuadratureRule, integrate
from .traces import (
    Hypersurface,
    disc_circle,
    norm_l2,
    restrict,
    sphere_equator,
    sphere_meridian,
    symbol_values,
    torus_line,
)
from .windows import exterior_mass

__all__ = [
    "ScalingFit",
    "SweepReport",
    "InsufficientDataError",
    "fit_exponent",
    "classify",
    "local_slope",
    "sharpness_ratio",
    "sharpness_ratio_rational",
    "sweep_neumann",
    "sweep_sharpness",
    "sweep_dirichlet_equator",
    "sweep_exterior_mass",
    "verify_totally_geodesic_contrast",
    "default_surface",
    "worker_count",
    "BOUNDED_SLOPE",
    "SUPERPOLY_SLOPE",
]

BOUNDED_SLOPE = 0.05
SUPERPOLY_SLOPE = 5.0
MIN_BOUNDED_POINTS = 12


class InsufficientDataError(ValueError):
    pass


@dataclass
class ScalingFit:
    h: list[float]
    v: list[float]
    slope: float
    intercept: float
    r2: float
    max_residual: float
    zeros_excluded: int = 0

    @property
    def decades(self) -> float:
        return math.log10(max(self.h) / min(self.h))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ScalingFit":
        return cls(**d)


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2, float(np.max(np.abs(resid)))


def fit_exponent(points: Iterable[tuple[float, float]]) -> ScalingFit:
    """Least squares of log v against log h; the slope is the exponent in v ~ h^slope.

    Exact zeros are dropped and counted; negative values are an error.
    """
    pts = [(float(h), float(v)) for h, v in points]
    if any(h <= 0 or v < 0 or not math.isfinite(v) for h, v in pts):
        raise InsufficientDataError("fit_exponent needs h > 0 and v >= 0")
    kept = [(h, v) for h, v in pts if v > 0]
    if len(kept) < 5:
        raise InsufficientDataError(f"need at least 5 positive points, got {len(kept)}")
    hs = np.array([p[0] for p in kept])
    vs = np.array([p[1] for p in kept])
    slope, intercept, r2, maxres = _linear_fit(np.log(hs), np.log(vs))
    return ScalingFit(hs.tolist(), vs.tolist(), slope, intercept, r2, maxres, len(pts) - len(kept))


def local_slope(h: Sequence[float], v: Sequence[float]) -> float:
    """Finite-difference slope of log v over log h across the top third (smallest h)."""
    order = np.argsort(h)[::-1]
    hs = np.asarray(h, dtype=float)[order]
    vs = np.asarray(v, dtype=float)[order]
    m = len(hs)
    first = m - max(2, math.ceil(m / 3))
    return float((math.log(vs[-1]) - math.log(vs[first])) / (math.log(hs[-1]) - math.log(hs[first])))


def classify(fit: ScalingFit, local: float | None = None, tol: float = BOUNDED_SLOPE) -> dict:
    """Deterministic verdict from a fit: bounded, grows, decays or superpolynomial decay."""
    n = len(fit.h)
    verdict = {"exponent": fit.slope, "points": n, "decades": fit.decades}
    if local is not None:
        verdict["local_slope"] = local
    if n < MIN_BOUNDED_POINTS or fit.decades < 1.0 - 1e-12:
        verdict["label"] = "insufficient-data"
    elif abs(fit.slope) <= tol:
        verdict["label"] = "bounded"
    elif fit.slope < -tol:
        verdict["label"] = "grows"
    elif local is not None and local > SUPERPOLY_SLOPE:
        verdict["label"] = "superpolynomial-decay"
    else:
        verdict["label"] = "decays"
    return verdict


@dataclass
class SweepReport:
    kind: str
    family: dict
    rows: list[dict]
    fits: dict[str, ScalingFit] = field(default_factory=dict)
    verdicts: dict[str, dict] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        return [row[name] for row in self.rows]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "family": self.family,
            "rows": self.rows,
            "fits": {k: v.to_dict() for k, v in self.fits.items()},
            "verdicts": self.verdicts,
            "failures": self.failures,
            "summary": self.summary,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SweepReport":
        return cls(
            d["kind"],
            d["family"],
            d["rows"],
            {k: ScalingFit.from_dict(v) for k, v in d["fits"].items()},
            d["verdicts"],
            d["failures"],
            d["summary"],
        )


# ---------------------------------------------------------------------------
# Parallel member evaluation


def worker_count(workers: int | None = None) -> int:
    """Explicit value, else SRL_THREADS (0 = one per CPU), else 1."""
    if workers is None:
        raw = os.environ.get("SRL_THREADS", "1")
        try:
            workers = int(raw)
        except ValueError:
            workers = 1
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def _map(fn: Callable, items: Sequence, workers: int | None) -> list:
    workers = worker_count(workers)
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _finish_rows(results: list) -> tuple[list[dict], list[dict]]:
    rows, failures = [], []
    for res in results:
        (failures if "error" in res else rows).append(res)
    rows.sort(key=lambda r: (r["lam"], r["index"]))
    return rows, failures


# ---------------------------------------------------------------------------
# Neumann sweeps


def default_surface(family: FamilySpec) -> Hypersurface:
    if family.kind.startswith("disc"):
        return disc_circle(family.r0)
    if family.kind == "sphere-highest-weight":
        return sphere_meridian()
    return torus_line(0.0)


def _neumann_member(args) -> dict:
    family, surface, delta, index = args
    try:
        spec, meta = family_member(family, index)
    except FamilyError as exc:
        return {"index": index, "error": str(exc)}
    trace = restrict(spec, surface)
    rep = energy_balance(trace, delta)
    row = {
        "index": index,
        "quantum": list(spec.quantum),
        "lam": spec.lam,
        "h": spec.h,
        "dirichlet_norm": norm_l2(trace, "dirichlet"),
        "neumann_norm": norm_l2(trace, "neumann"),
        "T_tan": rep.T_tan,
        "T_neu": rep.T_neu,
        "T_in": rep.T_in,
        "T_tan_mid": rep.T_tan_mid,
        "T_out": rep.T_out,
        "balance": rep.balance,
    }
    row.update({k: v for k, v in meta.items() if k != "index"})
    return row


def sweep_neumann(
    family: FamilySpec,
    surface: Hypersurface | None = None,
    delta: float = 0.6,
    measure: str = "neumann",
    tol: float = BOUNDED_SLOPE,
    workers: int | None = None,
) -> SweepReport:
    """Normalized Neumann norms (and the energy balance) along a family.

    ``measure`` selects the column passed through the boundedness verdict.
    """
    surface = surface or default_surface(family)
    if measure not in ("neumann", "dirichlet", "balance"):
        raise ValueError(f"unknown measure {measure!r}")
    col = {"neumann": "neumann_norm", "dirichlet": "dirichlet_norm", "balance": "balance"}[measure]
    results = _map(_neumann_member, [(family, surface, delta, i) for i in family.index_values], workers)
    rows, failures = _finish_rows(results)
    report = SweepReport(
        "neumann",
        {**family.describe(), "surface": surface.to_dict(), "delta": delta, "measure": measure},
        rows,
        failures=failures,
    )
    if len(rows) >= 5:
        fit = fit_exponent((r["h"], r[col]) for r in rows)
        report.fits[col] = fit
        report.verdicts["boundedness"] = classify(fit, tol=tol)
        bal = [r["balance"] for r in rows]
        if min(bal) > 0:
            report.fits["balance"] = fit_exponent((r["h"], r["balance"]) for r in rows)
    report.summary = {
        "sup_" + col: max((r[col] for r in rows), default=None),
        "sup_balance": max((r["balance"] for r in rows), default=None),
        "min_T_in": min((r["T_in"] for r in rows), default=None),
        "members": len(rows),
        "failed_members": len(failures),
    }
    return report


# ---------------------------------------------------------------------------
# Sphere sharpness


def sharpness_ratio_rational(k: int) -> Fraction:
    """||X u_k||^2_{L^2(H)} / (k^2 ||u_k||^2_{L^2(M)}) in exact rational arithmetic."""
    return sphere_meridian_neumann_sq_over_pi(k) / (k * k * sphere_norm_sq_over_pi(k))


def _log_meridian_neumann_sq(k: int) -> float:
    if k == 1:
        return math.log(2.0 * math.pi)
    return math.log(k * k * math.pi) + sum(math.log((2 * j - 1) / (2 * j)) for j in range(2, k))


def sharpness_ratio(k: int) -> tuple[float, float, float]:
    """(exact, quadrature, normalized_neumann_sq) for the degree-k highest weight harmonic.

    exact uses the closed-form products in log space; quadrature integrates
    sin^{2k+1} dphi = (1 - u^2)^k du (u = cos phi) by Gauss-Legendre, exact
    for this degree-2k polynomial, and k^2 sin^{2k-2} over the meridian by
    the periodic trapezoid rule.
    """
    spec = sphere_highest_weight(k)  # range check
    exact = math.exp(_log_meridian_neumann_sq(k) - 2.0 * math.log(k) - log_sphere_norm_sq(k))
    gl = QuadratureRule("gauss-legendre", k + 8, -1.0, 1.0)
    norm_sq = 2.0 * math.pi * float(integrate(gl, lambda u: (1.0 - u * u) ** k))
    tr = QuadratureRule("periodic-trapezoid", 2 * k + 8, 0.0, 2.0 * math.pi)
    neu_sq = float(integrate(tr, lambda p: k * k * np.sin(p) ** (2 * k - 2)))
    quad = neu_sq / (k * k * norm_sq)
    return exact, quad, exact * k * k * spec.h**2


def sweep_sharpness(ks: Sequence[int]) -> SweepReport:
    rows = []
    for k in ks:
        exact, quad, nn = sharpness_ratio(k)
        lam = math.sqrt(k * (k + 1))
        rows.append({"index": k, "lam": lam, "h": 1.0 / lam, "exact": exact, "quadrature": quad,
                     "normalized_neumann_sq": nn, "rel_diff": abs(exact - quad) / exact})
    report = SweepReport("sharpness", {"kind": "sphere-highest-weight", "indices": [min(ks), max(ks), 1]}, rows)
    report.summary = {
        "min_exact": min(r["exact"] for r in rows),
        "max_rel_diff": max(r["rel_diff"] for r in rows),
    }
    report.verdicts["lower_bound"] = {
        "label": "bounded-below" if report.summary["min_exact"] >= 0.25 else "failed",
        "bound": 0.25,
    }
    return report


# ---------------------------------------------------------------------------
# Dirichlet contrast on the equator


def sweep_dirichlet_equator(ks: Sequence[int]) -> SweepReport:
    """Equator Dirichlet norms of normalized highest weight harmonics; they grow like h^{-1/4}."""
    eq = sphere_equator()
    rows = []
    for k in ks:
        spec = sphere_highest_weight(k)
        tr = restrict(spec, eq)
        rows.append({"index": k, "lam": spec.lam, "h": spec.h,
                     "dirichlet_norm": norm_l2(tr, "dirichlet"),
                     "neumann_norm": norm_l2(tr, "neumann")})
    rows.sort(key=lambda r: r["lam"])
    report = SweepReport("dirichlet", {"kind": "sphere-highest-weight", "surface": eq.to_dict(),
                                       "indices": [min(ks), max(ks), 1]}, rows)
    fit = fit_exponent((r["h"], r["dirichlet_norm"]) for r in rows)
    report.fits["dirichlet_norm"] = fit
    report.verdicts["dirichlet"] = classify(fit)
    report.summary = {"max_neumann_norm": max(r["neumann_norm"] for r in rows)}
    return report


# ---------------------------------------------------------------------------
# Exterior mass on the disc


def _exterior_member(args) -> dict:
    r0, dprime, z, delta_w, n = args
    try:
        spec, z_eff = whispering_member(n, r0, dprime, z)
    except FamilyError as exc:
        return {"index": n, "error": str(exc)}
    trace = restrict(spec, disc_circle(r0))
    R = float((n * spec.h / r0) ** 2)
    arg = (R - 1.0) / spec.h**delta_w
    return {
        "index": n,
        "quantum": list(spec.quantum),
        "lam": spec.lam,
        "h": spec.h,
        "z_eff": z_eff,
        "tangential_frequency": n * spec.h / r0,
        "window_argument": arg,
        "predicted_zero": bool(arg <= 0.5),
        "trace_norm": norm_l2(trace, "dirichlet", "parseval"),
        "neumann_norm": norm_l2(trace, "neumann", "parseval"),
        "exterior_mass": exterior_mass(trace, delta_w),
    }


def sweep_exterior_mass(
    r0: float,
    dprime: float,
    z: float,
    delta_window: float,
    ns: Sequence[int],
    workers: int | None = None,
) -> SweepReport:
    """Trace norms and exterior mass along a whispering-gallery family.

    Regimes: dprime = 2/3 with delta_window < 2/3 looks for window-support
    zeros past a crossover; dprime < 2/3 with delta_window in (dprime, 2/3)
    looks for superpolynomial decay, tested against log(mass) linear in
    n^{1 - 3 dprime / 2}.
    """
    results = _map(_exterior_member, [(r0, dprime, z, delta_window, n) for n in ns], workers)
    rows, failures = _finish_rows(results)
    report = SweepReport(
        "exterior",
        {"kind": "disc-whispering", "r0": r0, "offset_exponent": dprime, "offset": z,
         "delta_window": delta_window, "indices": [min(ns), max(ns), 1]},
        rows,
        failures=failures,
    )
    if len(rows) < 5:
        return report
    trace_fit = fit_exponent((r["h"], r["trace_norm"]) for r in rows)
    report.fits["trace_norm"] = trace_fit
    report.fits["neumann_norm"] = fit_exponent((r["h"], r["neumann_norm"]) for r in rows)
    report.verdicts["trace_norm"] = classify(trace_fit)

    by_n = sorted(rows, key=lambda r: r["index"])
    zero_flags = [r["exterior_mass"] == 0.0 for r in by_n]
    crossover = None
    for i in range(len(by_n)):
        if all(zero_flags[i:]):
            crossover = by_n[i]["index"]
            break
    predicted = None
    for i in range(len(by_n)):
        if all(r["predicted_zero"] for r in by_n[i:]):
            predicted = by_n[i]["index"]
            break
    mismatches = [r["index"] for r in rows if r["predicted_zero"] != (r["exterior_mass"] == 0.0)]
    report.summary = {
        "zero_count": sum(zero_flags),
        "crossover": crossover,
        "predicted_crossover": predicted,
        "support_mismatches": mismatches,
        "members": len(rows),
        "failed_members": len(failures),
    }
    if delta_window < 2.0 / 3.0 and abs(dprime - 2.0 / 3.0) < 1e-3:
        report.verdicts["exterior_mass"] = {
            "label": "eventually-zero" if crossover is not None and not mismatches else "no-crossover-in-range",
            "crossover": crossover,
        }

    positive = [r for r in rows if r["exterior_mass"] > 0.0]
    if dprime < delta_window < 2.0 / 3.0 and len(positive) >= 5:
        mass_fit = fit_exponent((r["h"], r["exterior_mass"]) for r in positive)
        report.fits["exterior_mass"] = mass_fit
        power = 1.0 - 1.5 * dprime
        x = np.array([r["index"] ** power for r in positive], dtype=float)
        y = np.log([r["exterior_mass"] for r in positive])
        slope, intercept, r2, maxres = _linear_fit(x, y)
        local = local_slope([r["h"] for r in positive], [r["exterior_mass"] for r in positive])
        report.summary["decay_model"] = {"power": power, "slope": slope, "intercept": intercept,
                                         "r2": r2, "max_residual": maxres}
        report.verdicts["exterior_mass"] = classify(mass_fit, local)
    return report


# ---------------------------------------------------------------------------
# Totally geodesic contrast


def verify_totally_geodesic_contrast(
    ks: Sequence[int],
    deltas: Sequence[float] = (0.7, 0.8, 0.9),
    disc_report: SweepReport | None = None,
) -> SweepReport:
    """Exterior mass on the meridian (a great circle) and the equator of the sphere."""
    rows = []
    for k in ks:
        spec = sphere_highest_weight(k)
        for surface in (sphere_meridian(), sphere_equator()):
            tr = restrict(spec, surface)
            norm = norm_l2(tr, "dirichlet", "parseval")
            R = symbol_values(tr.dirichlet_series, spec.h)
            active = np.abs(tr.dirichlet_series.coefficients) > 0
            row = {"index": k, "lam": spec.lam, "h": spec.h, "surface": surface.kind,
                   "trace_norm": norm, "max_R": float(R[active].max()),
                   "top_offset": float(1.0 - R[active].max())}
            for d in deltas:
                row[f"exterior_mass_{d:g}"] = exterior_mass(tr, d)
                row[f"ratio_{d:g}"] = row[f"exterior_mass_{d:g}"] / norm
            rows.append(row)
    rows.sort(key=lambda r: (r["lam"], r["surface"]))
    worst = max(r[f"ratio_{d:g}"] for r in rows for d in deltas)
    report = SweepReport("geodesic-contrast", {"kind": "sphere-highest-weight", "deltas": list(deltas),
                                               "indices": [min(ks), max(ks), 1]}, rows)
    report.summary = {"max_exterior_ratio": worst}
    report.verdicts["totally_geodesic"] = {"label": "exterior-vanishes" if worst <= 1e-12 else "failed",
                                           "max_exterior_ratio": worst}
    if disc_report is not None:
        report.summary["disc_contrast"] = {
            "family": disc_report.family,
            "crossover": disc_report.summary.get("crossover"),
            "zero_count": disc_report.summary.get("zero_count"),
            "members": disc_report.summary.get("members"),
        }
    return report
