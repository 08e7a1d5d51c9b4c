import json

import pytest

from srlab import __version__, cli
from srlab.experiments import SweepReport
from srlab.rellich import ConvergenceError, RellichReport
from srlab.reporting import trace_from_dict, trace_to_dict


def _run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_spec_examples():
    cfg = cli.parse_args("sweep exterior --r0 0.5 --dprime 0.6667 --z 1 --delta 0.6 --n 40:400 --out report.json".split())
    assert (cfg.command, cfg.subcommand) == ("sweep", "exterior")
    assert cfg.params["index_range"] == (40, 400, 1)
    assert cfg.params["dprime"] == 0.6667 and cfg.out == "report.json"
    cfg = cli.parse_args("trace --model disc --n 5 --k 3 --r0 0.5 --grid 64 --format csv".split())
    assert cfg.params["grid"] == 64 and cfg.format == "csv"
    assert cli.parse_args("trace --model disc --n 5 --k 3".split()) == cli.parse_args("trace --model disc --n 5 --k 3".split())


@pytest.mark.parametrize(
    "argv,flag",
    [
        ("windows --model disc --delta 1.2", "--delta"),
        ("sweep exterior --delta -0.1", "--delta"),
        ("sweep exterior --n 40", "--n"),
        ("sweep exterior --r0 1.5", "--r0"),
        ("trace --model ellipse", "--model"),
        ("trace --n 3", "--model"),
        ("rellich --model disc --n 0 --k 1 --eps 0.7", "--eps"),
        ("sweep sharpness --k 0:10", "--k"),
        ("windows --model torus --m1 0 --m2 0", "--m2"),
    ],
)
def test_bad_arguments_exit_2(argv, flag, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.parse_args(argv.split())
    assert exc.value.code == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and flag in err[0]


def test_help_lists_defaults(capsys):
    for argv in (["sweep", "exterior", "--help"], ["rellich", "--help"], ["sweep", "neumann", "--help"]):
        with pytest.raises(SystemExit) as exc:
            cli.parse_args(argv)
        assert exc.value.code == 0
        assert "(default:" in capsys.readouterr().out


def test_config_merges_under_flags(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# exterior run\nz = 0.25\nr0 = 0.4\nn = 50:60\n")
    cfg = cli.parse_args(["sweep", "exterior", "--config", str(cfg_file), "--r0", "0.3"])
    assert cfg.params["z"] == 0.25
    assert cfg.params["r0"] == 0.3
    assert cfg.params["index_range"] == (50, 60, 1)


@pytest.mark.parametrize("text", ["colour = red\n", "z = -3\n", "just a line\n"])
def test_config_rejects_bad_keys(tmp_path, text, capsys):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text(text)
    with pytest.raises(SystemExit) as exc:
        cli.parse_args(["sweep", "exterior", "--config", str(cfg_file)])
    assert exc.value.code == 2
    assert "--config" in capsys.readouterr().err


def test_sharpness_command(capsys):
    code, out, _ = _run(["sweep", "sharpness", "--k", "1:100"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["srlab_version"] == __version__
    assert doc["config"]["params"]["index_range"] == [1, 100, 1]
    rows = doc["report"]["rows"]
    assert len(rows) == 100
    assert all(abs(r["exact"] - r["quadrature"]) <= 1e-8 * r["exact"] for r in rows)


def test_rellich_command(capsys):
    code, out, _ = _run("rellich --model disc --n 0 --k 1 --r0 0.5 --eps 0.2".split(), capsys)
    assert code == 0
    rep = RellichReport.from_dict(json.loads(out)["report"])
    assert rep.closure_residual <= 1e-6 * (abs(rep.T_tan) + rep.T_neu + 1)


def test_failed_verdict_exit_1(capsys):
    argv = "sweep neumann --family sphere --surface equator --measure dirichlet --range 5:200".split()
    code, out, err = _run(argv, capsys)
    assert code == 1
    assert json.loads(out)["report"]["verdicts"]["boundedness"]["label"] == "grows"
    assert "FAILED" in err


def test_numerical_failure_exit_3(monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise ConvergenceError("radial quadrature unsettled")

    monkeypatch.setattr(cli, "rellich_closure_disc", boom)
    code, out, err = _run("rellich --model disc --n 3 --k 2".split(), capsys)
    assert code == 3 and out == ""
    assert "numerical failure" in err


def test_trace_csv(capsys):
    code, out, _ = _run("trace --model disc --n 5 --k 3 --r0 0.5 --grid 64 --format csv".split(), capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == f"# srlab {__version__}"
    assert lines[2] == "s,re_dirichlet,im_dirichlet,re_neumann,im_neumann"
    assert len(lines) == 3 + 64
    # 17 significant digits
    assert len(lines[4].split(",")[1].lstrip("-").replace(".", "").lstrip("0")) >= 15


@pytest.mark.parametrize(
    "argv",
    [
        "trace --model sphere --k 12",
        "trace --model torus --m1 3 --m2 4",
        "trace --model disc --n 7 --k 2 --r0 0.6",
    ],
)
def test_trace_json_roundtrip(argv, capsys):
    code, out, _ = _run(argv.split(), capsys)
    assert code == 0
    body = json.loads(out)["report"]
    trace = trace_from_dict(body)
    assert json.loads(json.dumps(trace_to_dict(trace))) == body


@pytest.mark.parametrize(
    "argv",
    [
        "sweep neumann --family torus --range 3:40",
        "sweep dirichlet --k 50:120",
        "sweep exterior --z 0.1 --n 100:140",
        "sweep sharpness --k 1:30",
        "sweep geodesic-contrast --k 5:25",
    ],
)
def test_sweep_json_roundtrip_and_determinism(argv, capsys, tmp_path):
    out1 = tmp_path / "a.json"
    assert cli.main(argv.split() + ["--out", str(out1)]) in (0, 1)
    first = out1.read_bytes()
    assert cli.main(argv.split() + ["--out", str(out1)]) in (0, 1)
    assert out1.read_bytes() == first
    body = json.loads(out1.read_text())["report"]
    rep = SweepReport.from_dict(body)
    assert json.loads(json.dumps(rep.to_dict())) == body
    assert not list(tmp_path.glob(".*.tmp"))


def test_windows_and_models(capsys):
    code, out, _ = _run("windows --model sphere --k 20 --delta 0.51".split(), capsys)
    assert code == 0
    rep = json.loads(out)["report"]
    assert set(rep) == {"delta", "norms", "energies"}
    code, out, _ = _run(["models", "list", "--format", "csv"], capsys)
    assert code == 0 and "torus" in out


def test_emit_plot_data(tmp_path, capsys):
    code = cli.main(["sweep", "dirichlet", "--k", "50:80", "--emit-plot-data", str(tmp_path), "--out", str(tmp_path / "r.json")])
    assert code == 0
    lines = (tmp_path / "sweep_dirichlet_dirichlet_norm.csv").read_text().splitlines()
    assert lines[0] == "h,dirichlet_norm" and len(lines) == 32
