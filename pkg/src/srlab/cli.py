"""Command-line interface.

    srlab models list
    srlab trace --model disc --n 5 --k 3 --r0 0.5 --grid 64 --format csv
    srlab windows --model sphere --k 20 --surface meridian --delta 0.51
    srlab rellich --model disc --n 0 --k 1 --r0 0.5 --eps 0.2
    srlab sweep neumann --family torus --range 3:60
    srlab sweep dirichlet --k 50:400
    srlab sweep exterior --r0 0.5 --dprime 0.6667 --z 1 --delta 0.6 --n 40:400 --out report.json
    srlab sweep sharpness --k 1:100
    srlab sweep geodesic-contrast --k 5:200 --deltas 0.7,0.8,0.9

Exit codes: 0 success, 1 failed verdict, 2 bad arguments, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .experiments import (
    BOUNDED_SLOPE,
    SweepReport,
    sweep_dirichlet_equator,
    sweep_exterior_mass,
    sweep_neumann,
    sweep_sharpness,
    verify_totally_geodesic_contrast,
)
from .models import FamilyError, FamilySpec, ModelId, disc_eigenfunction, sphere_highest_weight, torus_plane_wave
from .rellich import ConvergenceError, energy_balance, rellich_closure_disc
from .reporting import dumps_json, plot_data_csv, rows_to_csv, trace_to_csv, trace_to_dict, write_atomic
from .specfun import BracketError, DomainError
from .traces import BandLimitError, disc_circle, restrict, sphere_equator, sphere_meridian, torus_line
from .windows import window_decompose

__all__ = ["RunConfig", "parse_args", "run", "main"]

EXIT_OK, EXIT_VERDICT, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    subcommand: str | None
    params: dict
    format: str = "json"
    out: str | None = None
    emit_plot_data: str | None = None
    threads: int | None = None
    tolerances: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# Argument types


def _delta(text: str) -> float:
    v = _float(text)
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1), got {text}")
    return v


def _open_unit(text: str) -> float:
    v = _float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text}")
    return v


def _positive(text: str) -> float:
    v = _float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def _index_range(text: str) -> tuple[int, int, int]:
    """a:b or a:b:step, inclusive."""
    parts = str(text).split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b or a:b:step, got {text!r}") from None
    if len(nums) == 2:
        nums.append(1)
    if len(nums) != 3 or nums[0] < 0 or nums[1] < nums[0] or nums[2] < 1:
        raise argparse.ArgumentTypeError(f"expected a:b or a:b:step with 0 <= a <= b, got {text!r}")
    return tuple(nums)


def _delta_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(p) for p in str(text).split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or any(not 0 <= v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"every delta must lie in [0, 1), got {text!r}")
    return vals


# ---------------------------------------------------------------------------
# Parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    p.add_argument("--out", default=None, help="output file (default: standard output)")
    p.add_argument("--config", default=None, help="file of 'key = value' lines; explicit flags win")
    p.add_argument("--emit-plot-data", dest="emit_plot_data", default=None, metavar="DIR",
                   help="write two-column CSVs (h, value) for every fitted curve into DIR")
    p.add_argument("--threads", type=_nonneg_int, default=None,
                   help="sweep worker processes (0 = one per CPU; default from SRL_THREADS)")


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=[m.value for m in ModelId], default=None, help="geometry (required)")
    p.add_argument("--n", type=_nonneg_int, default=0, help="disc angular order")
    p.add_argument("--k", type=_nonneg_int, default=1, help="disc radial index or sphere degree")
    p.add_argument("--m1", type=_int, default=3, help="torus frequency along H")
    p.add_argument("--m2", type=_int, default=4, help="torus frequency normal to H")
    p.add_argument("--r0", type=_open_unit, default=0.5, help="disc circle radius")
    p.add_argument("--surface", choices=("meridian", "equator"), default="meridian", help="sphere curve")
    p.add_argument("--c", type=_float, default=0.0, help="torus line height x2 = c")
    p.add_argument("--grid", type=_nonneg_int, default=None, help="grid size (default 4*band+16)")


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="srlab", description="Eigenfunction restriction laboratory", formatter_class=fmt)
    parser.add_argument("--version", action="version", version=f"srlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    leaves: dict[str, _Parser] = {}

    models = sub.add_parser("models", help="model catalog", formatter_class=fmt)
    msub = models.add_subparsers(dest="subcommand", required=True)
    p = msub.add_parser("list", help="list model geometries", formatter_class=fmt)
    _common(p)
    leaves["models list"] = p

    p = sub.add_parser("trace", help="Dirichlet and Neumann traces on a curve", formatter_class=fmt)
    _model_args(p)
    _common(p)
    leaves["trace"] = p

    p = sub.add_parser("windows", help="three-window decomposition of a trace", formatter_class=fmt)
    _model_args(p)
    p.add_argument("--delta", type=_delta, default=0.6, help="window scale exponent")
    _common(p)
    leaves["windows"] = p

    p = sub.add_parser("rellich", help="energy balance and Rellich closure", formatter_class=fmt)
    _model_args(p)
    p.add_argument("--delta", type=_delta, default=0.6, help="window scale exponent")
    p.add_argument("--eps", type=_positive, default=0.2, help="collar half-width (disc)")
    p.add_argument("--closure-tol", dest="closure_tol", type=_positive, default=1e-6,
                   help="relative tolerance of the Green closure")
    _common(p)
    leaves["rellich"] = p

    sweep = sub.add_parser("sweep", help="family sweeps", formatter_class=fmt)
    ssub = sweep.add_subparsers(dest="subcommand", required=True)

    p = ssub.add_parser("neumann", help="normalized Neumann norms along a family", formatter_class=fmt)
    p.add_argument("--family", choices=("torus", "sphere", "disc"), default="torus")
    p.add_argument("--range", dest="index_range", type=_index_range, default=None,
                   help="family index range a:b[:step] (default 3:60, 5:200 or 40:400)")
    p.add_argument("--surface", choices=("meridian", "equator"), default="meridian", help="sphere curve")
    p.add_argument("--measure", choices=("neumann", "dirichlet", "balance"), default="neumann",
                   help="column passed through the boundedness verdict")
    p.add_argument("--r0", type=_open_unit, default=0.5)
    p.add_argument("--dprime", type=_open_unit, default=2.0 / 3.0, help="offset exponent of the disc family")
    p.add_argument("--z", type=_positive, default=1.0, help="offset constant of the disc family")
    p.add_argument("--delta", type=_delta, default=0.6, help="window scale for the energy split")
    p.add_argument("--slope-tol", dest="slope_tol", type=_positive, default=BOUNDED_SLOPE,
                   help="|slope| threshold of the bounded verdict")
    _common(p)
    leaves["sweep neumann"] = p

    p = ssub.add_parser("dirichlet", help="sphere equator Dirichlet norms", formatter_class=fmt)
    p.add_argument("--k", dest="index_range", type=_index_range, default=(50, 400, 1))
    _common(p)
    leaves["sweep dirichlet"] = p

    p = ssub.add_parser("exterior", help="exterior mass along a whispering family", formatter_class=fmt)
    p.add_argument("--r0", type=_open_unit, default=0.5)
    p.add_argument("--dprime", type=_open_unit, default=2.0 / 3.0)
    p.add_argument("--z", type=_positive, default=1.0)
    p.add_argument("--delta", type=_delta, default=0.6, help="window scale exponent")
    p.add_argument("--n", dest="index_range", type=_index_range, default=(40, 400, 1))
    _common(p)
    leaves["sweep exterior"] = p

    p = ssub.add_parser("sharpness", help="sphere sharpness ratios", formatter_class=fmt)
    p.add_argument("--k", dest="index_range", type=_index_range, default=(1, 100, 1))
    p.add_argument("--agreement-tol", dest="agreement_tol", type=_positive, default=1e-8,
                   help="relative exact/quadrature tolerance")
    _common(p)
    leaves["sweep sharpness"] = p

    p = ssub.add_parser("geodesic-contrast", help="meridian vs equator exterior mass", formatter_class=fmt)
    p.add_argument("--k", dest="index_range", type=_index_range, default=(5, 200, 1))
    p.add_argument("--deltas", type=_delta_list, default=(0.7, 0.8, 0.9))
    _common(p)
    leaves["sweep geodesic-contrast"] = p
    return parser, leaves


_GLOBAL_KEYS = {"format", "out", "config", "emit_plot_data", "threads", "command", "subcommand"}
_TOLERANCE_KEYS = {"slope_tol", "closure_tol", "agreement_tol"}


def _read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"argument --config: cannot read {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"argument --config: line {lineno} is not 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(leaf: _Parser, values: dict[str, str]) -> None:
    actions = {a.dest: a for a in leaf._actions}
    for a in leaf._actions:
        for opt in a.option_strings:
            actions.setdefault(opt.lstrip("-").replace("-", "_"), a)
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or action.dest in ("config", "help"):
            raise UsageError(f"argument --config: unknown key {key!r}")
        try:
            value = action.type(raw) if action.type else raw
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"argument --config: {key}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"argument --config: {key}: invalid choice {value!r}")
        defaults[action.dest] = value
    leaf.set_defaults(**defaults)


def parse_args(argv: list[str] | None = None) -> RunConfig:
    """Parse the command line (and an optional config file) into a RunConfig.

    Exits with status 2 and a one-line diagnostic on invalid input.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, leaves = build_parser()
    ns = parser.parse_args(argv)
    key = ns.command if ns.command in leaves else f"{ns.command} {ns.subcommand}"
    leaf = leaves[key]
    if ns.config:
        try:
            _apply_config(leaf, _read_config(ns.config))
        except UsageError as exc:
            leaf.error(str(exc))
        ns = parser.parse_args(argv)
    params = {k: v for k, v in vars(ns).items() if k not in _GLOBAL_KEYS and k not in _TOLERANCE_KEYS}
    tolerances = {k: v for k, v in vars(ns).items() if k in _TOLERANCE_KEYS}
    _validate(leaf, key, params)
    return RunConfig(
        command=ns.command,
        subcommand=getattr(ns, "subcommand", None),
        params=params,
        format=ns.format,
        out=ns.out,
        emit_plot_data=ns.emit_plot_data,
        threads=ns.threads,
        tolerances=tolerances,
    )


def _validate(leaf: _Parser, key: str, params: dict) -> None:
    model = params.get("model")
    if key in ("trace", "windows", "rellich") and model is None:
        leaf.error("argument --model: required (flag or config key)")
    if model == "disc" and params.get("k", 1) < 1:
        leaf.error("argument --k: disc radial index must be >= 1")
    if model == "sphere" and not 1 <= params.get("k", 1) <= 500:
        leaf.error("argument --k: sphere degree must lie in [1, 500]")
    if model == "torus" and params.get("m1") == 0 and params.get("m2") == 0:
        leaf.error("argument --m2: torus frequency vector must be nonzero")
    if key == "rellich" and model == "disc":
        r0, eps = params["r0"], params["eps"]
        if not eps < min(r0, 1 - r0):
            leaf.error(f"argument --eps: must be < min(r0, 1 - r0) = {min(r0, 1 - r0):g}")
    rng = params.get("index_range")
    if rng is not None:
        start, stop, _ = rng
        if key in ("sweep sharpness", "sweep dirichlet", "sweep geodesic-contrast") and not (1 <= start and stop <= 500):
            leaf.error("argument --k: sphere degrees must lie in [1, 500]")
        if key == "sweep exterior" and not (1 <= start and stop <= 2000):
            leaf.error("argument --n: angular orders must lie in [1, 2000]")


# ---------------------------------------------------------------------------
# Execution


def _spec_and_surface(p: dict):
    model = ModelId(p["model"])
    if model is ModelId.DISC:
        return disc_eigenfunction(p["n"], p["k"]), disc_circle(p["r0"])
    if model is ModelId.SPHERE:
        surface = sphere_meridian() if p["surface"] == "meridian" else sphere_equator()
        return sphere_highest_weight(p["k"]), surface
    return torus_plane_wave(p["m1"], p["m2"]), torus_line(p["c"])


def _family(p: dict) -> FamilySpec:
    kind = {"torus": "torus-direction", "sphere": "sphere-highest-weight", "disc": "disc-whispering"}[p["family"]]
    default_range = {"torus": (3, 60, 1), "sphere": (5, 200, 1), "disc": (40, 400, 1)}[p["family"]]
    return FamilySpec(kind, tuple(p["index_range"] or default_range), r0=p["r0"],
                      offset_exponent=p["dprime"], offset=p["z"])


def _rng(p: dict) -> range:
    a, b, s = p["index_range"]
    return range(a, b + 1, s)


def _execute(cfg: RunConfig) -> tuple[object, int, list[dict] | None]:
    """(payload, verdict exit code, csv rows or None)."""
    p = cfg.params
    key = cfg.command if cfg.command in ("trace", "windows", "rellich") else f"{cfg.command} {cfg.subcommand}"
    if key == "models list":
        rows = [{"model": m.value, "description": m.description, "volume_form": m.volume_form} for m in ModelId]
        return {"models": rows}, EXIT_OK, rows
    if key == "trace":
        spec, surface = _spec_and_surface(p)
        trace = restrict(spec, surface, p["grid"])
        return trace, EXIT_OK, None
    if key == "windows":
        spec, surface = _spec_and_surface(p)
        rep = window_decompose(restrict(spec, surface, p["grid"]), p["delta"]).report()
        rows = [{"window": w, "norm": rep["norms"][w], "energy": rep["energies"][w]} for w in ("in", "tan", "out")]
        return rep, EXIT_OK, rows
    if key == "rellich":
        spec, surface = _spec_and_surface(p)
        if spec.model is ModelId.DISC:
            rep = rellich_closure_disc(spec, p["r0"], p["eps"], p["delta"])
            scale = abs(rep.T_tan) + rep.T_neu + 1.0
            ok = rep.closure_residual <= cfg.tolerances.get("closure_tol", 1e-6) * scale
        else:
            rep = energy_balance(restrict(spec, surface, p["grid"]), p["delta"])
            ok = rep.T_in >= 0 and rep.T_neu >= 0
        return rep, EXIT_OK if ok else EXIT_VERDICT, [rep.to_dict()]
    if key == "sweep neumann":
        fam = _family(p)
        surface = None
        if fam.kind == "sphere-highest-weight" and p["surface"] == "equator":
            surface = sphere_equator()
        rep = sweep_neumann(fam, surface, p["delta"], p["measure"], cfg.tolerances.get("slope_tol", BOUNDED_SLOPE),
                            workers=cfg.threads)
        label = rep.verdicts.get("boundedness", {}).get("label")
        return rep, EXIT_OK if label in ("bounded", "decays", "superpolynomial-decay") else EXIT_VERDICT, rep.rows
    if key == "sweep dirichlet":
        rep = sweep_dirichlet_equator(_rng(p))
        ok = rep.summary["max_neumann_norm"] < 1e-12
        return rep, EXIT_OK if ok else EXIT_VERDICT, rep.rows
    if key == "sweep exterior":
        rep = sweep_exterior_mass(p["r0"], p["dprime"], p["z"], p["delta"], _rng(p), workers=cfg.threads)
        ok = not rep.summary.get("support_mismatches")
        return rep, EXIT_OK if ok else EXIT_VERDICT, rep.rows
    if key == "sweep sharpness":
        rep = sweep_sharpness(_rng(p))
        tol = cfg.tolerances.get("agreement_tol", 1e-8)
        ok = rep.verdicts["lower_bound"]["label"] == "bounded-below" and all(
            r["rel_diff"] <= tol for r in rep.rows if r["index"] <= 100)
        return rep, EXIT_OK if ok else EXIT_VERDICT, rep.rows
    if key == "sweep geodesic-contrast":
        rep = verify_totally_geodesic_contrast(_rng(p), p["deltas"])
        ok = rep.verdicts["totally_geodesic"]["label"] == "exterior-vanishes"
        return rep, EXIT_OK if ok else EXIT_VERDICT, rep.rows
    raise UsageError(f"unknown command {key!r}")


def _emit_plot_data(directory: str, rep: SweepReport, stem: str) -> None:
    for name, fit in rep.fits.items():
        write_atomic(Path(directory) / f"{stem}_{name}.csv", plot_data_csv(fit.h, fit.v, ("h", name)))


def run(cfg: RunConfig) -> int:
    """Execute a parsed configuration; returns the process exit code."""
    try:
        payload, code, rows = _execute(cfg)
    except (ConvergenceError, BracketError, FamilyError, ArithmeticError) as exc:
        print(f"srlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, BandLimitError, UsageError, ValueError) as exc:
        print(f"srlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    resolved = cfg.to_dict()
    if cfg.format == "json":
        body = trace_to_dict(payload) if key_is_trace(cfg) else payload
        text = dumps_json({"srlab_version": __version__, "config": resolved, "report": body})
    else:
        header = [f"srlab {__version__}", "config " + dumps_json(resolved).replace("\n", " ").strip()]
        text = trace_to_csv(payload, header) if key_is_trace(cfg) else rows_to_csv(rows or [], header)

    if cfg.emit_plot_data and isinstance(payload, SweepReport):
        stem = f"{cfg.command}_{cfg.subcommand}".replace("-", "_")
        _emit_plot_data(cfg.emit_plot_data, payload, stem)
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)
    if code == EXIT_VERDICT:
        print("srlab: verdict FAILED", file=sys.stderr)
    return code


def key_is_trace(cfg: RunConfig) -> bool:
    return cfg.command == "trace"


def main(argv: list[str] | None = None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
