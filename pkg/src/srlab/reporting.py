"""Deterministic JSON/CSV serialization and atomic file output."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .specfun import FourierSeries
from .traces import Trace

__all__ = [
    "to_jsonable",
    "dumps_json",
    "format_float",
    "rows_to_csv",
    "trace_to_dict",
    "trace_from_dict",
    "trace_to_csv",
    "write_atomic",
    "plot_data_csv",
]


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become None, complex becomes [re, im]."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(obj.real), to_jsonable(obj.imag)]
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def dumps_json(obj) -> str:
    # Python's float repr is the shortest round-trip decimal.
    return json.dumps(to_jsonable(obj), indent=2, allow_nan=False) + "\n"


def format_float(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    if isinstance(x, (list, tuple)):
        return " ".join(format_float(v) for v in x)
    return str(x)


def rows_to_csv(rows: list[dict], header_lines: list[str] | None = None) -> str:
    buf = io.StringIO()
    for line in header_lines or []:
        buf.write(f"# {line}\n")
    if not rows:
        return buf.getvalue()
    columns = list(rows[0])
    for row in rows[1:]:
        columns.extend(c for c in row if c not in columns)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_float(row.get(c)) for c in columns])
    return buf.getvalue()


def _series_to_dict(s: FourierSeries) -> dict:
    modes = s.modes
    nz = np.nonzero(s.coefficients)[0]
    return {
        "period": s.period,
        "size": s.size,
        "modes": [int(modes[i]) for i in nz],
        "re": [float(s.coefficients[i].real) for i in nz],
        "im": [float(s.coefficients[i].imag) for i in nz],
    }


def _series_from_dict(d: dict) -> FourierSeries:
    coeffs = np.zeros(d["size"], dtype=complex)
    half = d["size"] // 2
    for m, re, im in zip(d["modes"], d["re"], d["im"]):
        coeffs[m + half] = complex(re, im)
    return FourierSeries(coeffs, d["period"])


def trace_to_dict(trace: Trace) -> dict:
    return {
        "spec": trace.spec.to_dict(),
        "surface": trace.surface.to_dict(),
        "h": trace.h,
        "grid_size": trace.size,
        "dirichlet": {"re": trace.dirichlet.real.tolist(), "im": trace.dirichlet.imag.tolist()},
        "neumann": {"re": trace.neumann.real.tolist(), "im": trace.neumann.imag.tolist()},
        "dirichlet_fourier": _series_to_dict(trace.dirichlet_series),
        "neumann_fourier": _series_to_dict(trace.neumann_series),
    }


def trace_from_dict(d: dict) -> Trace:
    from .models import EigenfunctionSpec
    from .traces import Hypersurface

    return Trace(
        EigenfunctionSpec.from_dict(d["spec"]),
        Hypersurface.from_dict(d["surface"]),
        np.array(d["dirichlet"]["re"]) + 1j * np.array(d["dirichlet"]["im"]),
        np.array(d["neumann"]["re"]) + 1j * np.array(d["neumann"]["im"]),
        _series_from_dict(d["dirichlet_fourier"]),
        _series_from_dict(d["neumann_fourier"]),
    )


def trace_to_csv(trace: Trace, header_lines: list[str] | None = None) -> str:
    rows = [
        {"s": s, "re_dirichlet": d.real, "im_dirichlet": d.imag, "re_neumann": nu.real, "im_neumann": nu.imag}
        for s, d, nu in zip(trace.grid, trace.dirichlet, trace.neumann)
    ]
    return rows_to_csv(rows, header_lines)


def plot_data_csv(xs, ys, names=("h", "value")) -> str:
    return rows_to_csv([{names[0]: float(x), names[1]: float(y)} for x, y in zip(xs, ys)])


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
