import json
from pathlib import Path

import numpy as np
import pytest

from cavity_array.cli import REPRODUCE_CONFIGS, main
from cavity_array.exceptions import ConfigError
from cavity_array.plots import emit_plots
from cavity_array.sweep import (COLUMNS, format_value, parse_config, parse_values, read_csv,
                                run, sweep_points)

STEADY = """
[params]
delta = 0
gamma_a = 0.1
gamma_sigma = 0.01
P_sigma = 5
[lattice]
N = 12
[sweep]
J = 0.5, 10
[task]
name = steady
"""


def _write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_two_point_sweep_gives_two_rows(tmp_path):
    m = run(parse_config(STEADY, out_dir=tmp_path))
    columns, rows = read_csv(tmp_path / "steady.csv")
    assert columns == COLUMNS["steady"]
    assert len(rows) == 2 and m.rows == {"steady": 2}
    assert [float(r["J[g]"]) for r in rows] == [0.5, 10.0]
    assert all(r["status"] == "ok" for r in rows)
    listed = {f["path"] for f in m.files}
    assert {"steady.csv", "steady_population.svg"} <= listed
    for f in m.files:
        assert (tmp_path / f["path"]).exists()


def test_rerun_is_byte_identical(tmp_path):
    a = run(parse_config(STEADY, out_dir=tmp_path / "a"))
    b = run(parse_config(STEADY, out_dir=tmp_path / "b"))
    assert [f["sha256"] for f in a.files] == [f["sha256"] for f in b.files]
    raw = (tmp_path / "a" / "steady.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")


def test_worker_pool_keeps_sweep_order(tmp_path, monkeypatch):
    text = STEADY.replace("J = 0.5, 10", "J = linspace(0.1, 5, 9)")
    serial = run(parse_config(text, out_dir=tmp_path / "s"), emit=False)
    monkeypatch.setenv("SIMULATE_WORKERS", "3")
    pooled = run(parse_config(text, out_dir=tmp_path / "p"), workers=1, emit=False)
    assert serial.files[0]["sha256"] == pooled.files[0]["sha256"]


def test_value_expressions():
    assert parse_values("1, 2.5") == [1.0, 2.5]
    assert parse_values("linspace(0, 1, 3)") == [0.0, 0.5, 1.0]
    assert parse_values("logspace(-1, 1, 3)") == pytest.approx([0.1, 1.0, 10.0])
    assert parse_values("geomspace(1, 100, 3)") == pytest.approx([1.0, 10.0, 100.0])
    assert parse_values("range(0, 1, 0.25)") == [0.0, 0.25, 0.5, 0.75]
    for bad in ("", "linspace(0, 1)", "range(0, 1, 0)", "a, b"):
        with pytest.raises(ValueError):
            parse_values(bad)


def test_delta_over_J_and_lattice_axes():
    cfg = parse_config("""
[params]
P_sigma = 5
[sweep]
N = 4, 8
J = 1, 2
delta_over_J = 0, 2
[task]
name = steady
""")
    pts = sweep_points(cfg)
    assert len(pts) == 8
    assert [(lat.N, p.J, p.delta) for p, lat in pts[:4]] == [
        (4, 1.0, 0.0), (4, 1.0, 2.0), (4, 2.0, 0.0), (4, 2.0, 4.0)]


@pytest.mark.parametrize("text,where", [
    ("[params]\nJ = abc\n[task]\nname = steady\n", "line 2"),
    ("[params]\nJ = 1\nbogus = 2\n[task]\nname = steady\n", "line 3"),
    ("[task]\nname = steady\n[sweep]\nwidth = 1, 2\n", "line 4"),
    ("[task]\nname = dance\n", "line 2"),
    ("[lattice]\nN = 1.5\n[task]\nname = steady\n", "line 2"),
    ("[sweep]\nJ = linspace(0, 1)\n[task]\nname = steady\n", "line 2"),
])
def test_schema_violations_name_the_line(text, where):
    with pytest.raises(ConfigError, match=where):
        parse_config(text)


def test_missing_task_and_bad_values():
    with pytest.raises(ConfigError, match="task"):
        parse_config("[params]\nJ = 1\n")
    with pytest.raises(ConfigError, match="params"):
        parse_config("[params]\nJ = -1\n[task]\nname = steady\n")
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config("[extra]\nx = 1\n[task]\nname = steady\n")


def test_failed_points_become_null_rows(tmp_path):
    # the fit needs N >= 16, so the N = 8 point fails and the N = 32 point succeeds
    cfg = parse_config("""
[params]
J = 0.5
[sweep]
N = 8, 32
[task]
name = fit
""", out_dir=tmp_path)
    m = run(cfg)
    _, rows = read_csv(tmp_path / "fit.csv")
    assert rows[0]["status"].startswith("ParameterError") and rows[0]["lambda_fit[1/site]"] == ""
    assert rows[1]["status"] == "ok"
    assert [f["point"] for f in m.failures] == [0]
    saved = json.loads((tmp_path / "manifest.json").read_text())
    assert saved["failures"] == m.failures and saved["version"] == "0.1.0"


def test_warnings_surface_in_manifest(tmp_path):
    cfg = parse_config("""
[params]
gamma_a = 0.5
P_sigma = 10
[task]
name = oracle
[solver]
cutoff = 6
""", out_dir=tmp_path)
    m = run(cfg)
    assert any("leaks" in w["message"] for w in m.warnings)


def test_figure2_writes_mode_table(tmp_path):
    cfg = parse_config("""
[params]
J = 10
P_sigma = 5
[lattice]
N = 4
[sweep]
delta = -20, 0, 20
[task]
name = figure2
""", out_dir=tmp_path)
    m = run(cfg)
    assert m.rows == {"figure2": 3, "figure2_modes": 12}
    assert (tmp_path / "figure2_figure2.svg").exists()


@pytest.mark.parametrize("task,extra", [
    ("correlations", "[lattice]\nN = 12\n[params]\nJ = 0.5\n"),
    ("analytic", "[lattice]\nN = 12\n[params]\nJ = 0.5\n"),
    ("spectrum", "[solver]\nomega_points = 11\n"),
    ("figure3", "[lattice]\nN = 24\n[params]\nJ = 0.5\n"),
])
def test_every_task_runs(tmp_path, task, extra):
    m = run(parse_config(extra + f"[task]\nname = {task}\n", out_dir=tmp_path))
    assert not m.failures
    _, rows = read_csv(tmp_path / f"{task}.csv")
    assert rows and all(r["status"] == "ok" for r in rows)


def test_format_value():
    assert format_value(0.1) == "1.0000000000000001e-01"
    assert format_value(np.float64(2)) == "2.0000000000000000e+00"
    assert format_value(True) == "true" and format_value(None) == ""
    assert format_value(3) == "3" and format_value(float("nan")) == "nan"


def test_plot_errors_write_nothing(tmp_path):
    empty = tmp_path / "steady.csv"
    empty.write_text(",".join(COLUMNS["steady"]) + "\n")
    with pytest.raises(ValueError, match="empty"):
        emit_plots(empty, "population", tmp_path / "plots")
    with pytest.raises(ValueError, match="unknown"):
        emit_plots(empty, "pie", tmp_path / "plots")
    assert not (tmp_path / "plots").exists() or not any((tmp_path / "plots").iterdir())


def test_lambda_plot_has_reference_slopes(tmp_path):
    cfg = parse_config("""
[params]
P_sigma = 5
[lattice]
N = 24
[sweep]
delta_over_J = 0, 2
J = 0.5, 1, 2
[task]
name = figure3
""", out_dir=tmp_path)
    run(cfg)
    svg = (tmp_path / "figure3_lambda.svg").read_text()
    assert "slope -1" in svg and "slope -1/2" in svg


def test_cli_exit_codes(tmp_path, capsys):
    good = _write(tmp_path, STEADY)
    assert main(["steady", "--config", str(good), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "steady.csv").exists()

    bad = _write(tmp_path, "[params]\nJ = x\n", "bad.ini")
    assert main(["steady", "--config", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err

    assert main(["fit", "--config", str(good), "--out", str(tmp_path / "x")]) == 1

    partial = _write(tmp_path, "[params]\nJ = 0.5\n[sweep]\nN = 8, 32\n", "partial.ini")
    assert main(["fit", "--config", str(partial), "--out", str(tmp_path / "p"),
                 "--workers", "2", "--seed", "7"]) == 2


def test_reproduce_chains_a_config_directory(tmp_path):
    cfgs = tmp_path / "cfgs"
    cfgs.mkdir()
    (cfgs / "a.ini").write_text(STEADY)
    (cfgs / "b.ini").write_text(STEADY.replace("name = steady", "name = analytic"))
    assert main(["reproduce", "--config", str(cfgs), "--out", str(tmp_path / "r")]) == 0
    assert (tmp_path / "r" / "a" / "steady.csv").exists()
    assert (tmp_path / "r" / "b" / "analytic.csv").exists()
    assert main(["reproduce", "--config", str(tmp_path / "none")]) == 1


def test_builtin_reproduce_configs_parse():
    for name, text in REPRODUCE_CONFIGS.items():
        cfg = parse_config(text)
        assert sweep_points(cfg), name
