import math
from fractions import Fraction

import numpy as np
import pytest

from srlab.experiments import (
    InsufficientDataError,
    ScalingFit,
    SweepReport,
    classify,
    fit_exponent,
    local_slope,
    sharpness_ratio,
    sharpness_ratio_rational,
    sweep_dirichlet_equator,
    sweep_exterior_mass,
    sweep_neumann,
    sweep_sharpness,
    verify_totally_geodesic_contrast,
    worker_count,
)
from srlab.models import FamilySpec, sphere_highest_weight
from srlab.traces import sphere_equator


def _power_law(p, hs=None):
    hs = np.geomspace(1e-3, 1e-1, 30) if hs is None else hs
    return [(h, 2.0 * h**p) for h in hs]


def test_fit_recovers_exponent():
    fit = fit_exponent(_power_law(0.25))
    assert fit.slope == pytest.approx(0.25, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(2.0), abs=1e-12)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.decades == pytest.approx(2.0)


def test_fit_drops_zeros_and_rejects_bad_input():
    pts = _power_law(1.0) + [(0.5, 0.0)]
    assert fit_exponent(pts).zeros_excluded == 1
    with pytest.raises(InsufficientDataError):
        fit_exponent([(0.1, 1.0)] * 4)
    with pytest.raises(InsufficientDataError):
        fit_exponent(_power_law(1.0) + [(0.1, -1.0)])


@pytest.mark.parametrize(
    "p,label",
    [(0.0, "bounded"), (0.04, "bounded"), (-0.25, "grows"), (0.5, "decays")],
)
def test_classify_labels(p, label):
    assert classify(fit_exponent(_power_law(p)))["label"] == label


def test_classify_superpolynomial_and_insufficient():
    hs = np.geomspace(1e-3, 1e-1, 30)
    pts = [(h, math.exp(-1.0 / h**0.5)) for h in hs]
    fit = fit_exponent(pts)
    local = local_slope([p[0] for p in pts], [p[1] for p in pts])
    assert local > 5
    assert classify(fit, local)["label"] == "superpolynomial-decay"
    short = fit_exponent(_power_law(0.0, np.geomspace(1e-2, 5e-2, 20)))
    assert classify(short)["label"] == "insufficient-data"


def test_local_slope_of_power_law():
    hs = np.geomspace(1e-3, 1e-1, 31)
    assert local_slope(hs, 3.0 * hs**1.5) == pytest.approx(1.5, rel=1e-12)


def test_sharpness_exact_values():
    assert sharpness_ratio_rational(1) == Fraction(3, 4)
    assert sharpness_ratio_rational(2) == Fraction(15, 32)
    assert sharpness_ratio_rational(3) == Fraction(945, 2304)
    for k in (1, 2, 3, 10, 100):
        exact, quad, _ = sharpness_ratio(k)
        assert exact == pytest.approx(float(sharpness_ratio_rational(k)), rel=1e-13)
        assert quad == pytest.approx(exact, rel=1e-8)


def test_sharpness_decreases_to_one_over_pi():
    vals = [sharpness_ratio(k)[0] for k in range(2, 501)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert min(vals) >= 0.25
    # prod_{j>=2} (2j-1)/(2j) * prod_j (2j+1)/(2j) telescopes toward a Wallis limit of 1/pi
    assert vals[-1] == pytest.approx(1 / math.pi, rel=2e-3)


def test_sharpness_normalized_neumann():
    _, _, nn = sharpness_ratio(50)
    # ||h X u||^2 = exact * k^2 h^2 with h^2 = 1/(k(k+1))
    assert nn == pytest.approx(sharpness_ratio(50)[0] * 50 / 51, rel=1e-14)


def test_sweep_sharpness_report():
    rep = sweep_sharpness(range(1, 40))
    assert rep.verdicts["lower_bound"]["label"] == "bounded-below"
    assert rep.summary["max_rel_diff"] < 1e-8


def test_dirichlet_equator_growth():
    rep = sweep_dirichlet_equator(range(50, 401, 5))
    assert rep.fits["dirichlet_norm"].slope == pytest.approx(-0.25, abs=0.02)
    # 50..400 spans under one decade of h; the verdict needs a wider range
    assert rep.verdicts["dirichlet"]["label"] == "insufficient-data"
    assert sweep_dirichlet_equator(range(5, 401, 5)).verdicts["dirichlet"]["label"] == "grows"
    assert rep.summary["max_neumann_norm"] == 0.0


def test_neumann_sweep_torus_bounded():
    rep = sweep_neumann(FamilySpec("torus-direction", (3, 60, 1)))
    assert rep.verdicts["boundedness"]["label"] == "bounded"
    # (t, t+1) plane waves: ||h d_n phi|| = (t+1)/|m| / sqrt(2 pi)
    for row in rep.rows:
        t = row["index"]
        assert row["neumann_norm"] == pytest.approx((t + 1) / math.hypot(t, t + 1) / math.sqrt(2 * math.pi), rel=1e-12)


def test_neumann_sweep_flags_growth():
    fam = FamilySpec("sphere-highest-weight", (5, 200, 1))
    rep = sweep_neumann(fam, sphere_equator(), measure="dirichlet")
    assert rep.verdicts["boundedness"]["label"] == "grows"
    with pytest.raises(ValueError):
        sweep_neumann(fam, measure="energy")


def test_parallel_sweep_matches_serial():
    fam = FamilySpec("disc-whispering", (40, 60, 1))
    serial = sweep_neumann(fam, workers=1)
    parallel = sweep_neumann(fam, workers=2)
    assert serial.to_dict() == parallel.to_dict()


def test_worker_count(monkeypatch):
    monkeypatch.setenv("SRL_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("SRL_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.delenv("SRL_THREADS")
    assert worker_count() == 1
    assert worker_count(5) == 5


def test_exterior_sweep_support_zeros():
    rep = sweep_exterior_mass(0.5, 2.0 / 3.0, 0.1, 0.6, range(100, 161))
    s = rep.summary
    assert s["support_mismatches"] == []
    assert s["crossover"] == s["predicted_crossover"] == 122
    assert all(r["exterior_mass"] == 0.0 for r in rep.rows if r["index"] >= 122)


def test_geodesic_contrast():
    rep = verify_totally_geodesic_contrast(range(5, 30))
    assert rep.verdicts["totally_geodesic"]["label"] == "exterior-vanishes"
    assert rep.summary["max_exterior_ratio"] == 0.0


def test_report_roundtrips():
    fit = fit_exponent(_power_law(0.3))
    assert ScalingFit.from_dict(fit.to_dict()) == fit
    rep = sweep_dirichlet_equator(range(50, 80))
    again = SweepReport.from_dict(rep.to_dict())
    assert again.to_dict() == rep.to_dict()
    assert again.column("index") == list(range(50, 80))


@pytest.mark.parametrize(
    "family",
    [
        FamilySpec("torus-direction", (3, 60, 1)),
        FamilySpec("sphere-highest-weight", (5, 200, 1)),
        FamilySpec("disc-whispering", (40, 400, 3)),
    ],
    ids=["torus", "sphere", "disc"],
)
def test_balance_has_no_growth(family):
    rep = sweep_neumann(family, measure="balance")
    fit = rep.fits["balance"]
    # no positive trend against 1/h; the disc balance actually decays
    assert fit.slope >= -0.05
    assert math.isfinite(rep.summary["sup_balance"])
    assert rep.summary["min_T_in"] >= 0.0


def test_fit_on_noisy_sixth_root():
    rng = np.random.default_rng(20261017)
    hs = np.geomspace(1e-3, 1e-1, 20)
    vs = 3.0 * hs ** (1 / 6) * (1 + 0.01 * rng.standard_normal(20))
    assert 0.13 <= fit_exponent(zip(hs, vs)).slope <= 0.20
    assert fit_exponent((h, 7.0) for h in hs).slope == pytest.approx(0.0, abs=1e-12)


def test_equator_k2_single_row():
    from srlab.traces import norm_l2, restrict

    spec = sphere_highest_weight(2)
    assert spec.norm_const**2 == pytest.approx(15 / (32 * math.pi), rel=1e-14)
    tr = restrict(spec, sphere_equator())
    assert norm_l2(tr) ** 2 == pytest.approx(2 * math.pi * 15 / (32 * math.pi), rel=1e-14)
