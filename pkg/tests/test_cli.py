import csv
import math

import numpy as np
import pytest

from dugks import FluxMode, SchemeKind, Variant
from dugks.benchmarks import CaseKind
from dugks.cli import (EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK, PUBLISHED, TABLES, Cell, ConfigError,
                       main, parse_config, read_table, run, run_cell, table_cells, table_driver,
                       write_table)


def test_empty_config_needs_benchmark():
    with pytest.raises(ConfigError, match="benchmark required"):
        parse_config("", env={})
    with pytest.raises(ConfigError, match="benchmark required"):
        parse_config("# nothing here\n\n", env={})


def test_defaults():
    spec = parse_config("benchmark = translation", env={})
    assert spec.preset == "DUGKS-I"
    assert (spec.variant, spec.flux_mode) == (Variant.A, FluxMode.PARABOLIC)
    assert spec.face_scheme.kind is SchemeKind.WENO_Z5
    assert (spec.chi, spec.Pe, spec.W) == (0.5, 60.0, 4.0)
    case = spec.benchmark
    assert (case.L0, case.U0, case.R) == (100.0, 0.02, 25.0)
    assert spec.solver_config().model.tau_f == pytest.approx(0.004)


def test_full_table1_spec():
    text = """
    # translation, improved model
    benchmark = translation
    preset = DUGKS-II
    face_scheme = WENO-Z3
    chi = 0.5   # default anyway
    pe = 60
    periods = 10
    """
    spec = parse_config(text, env={})
    assert spec.benchmark.kind is CaseKind.TRANSLATION
    assert spec.variant is Variant.B and spec.face_scheme.kind is SchemeKind.WENO_Z3
    assert spec.periods == 10.0


@pytest.mark.parametrize("text,line,msg", [
    ("benchmark = translation\nchi = 1.5", 2, "chi"),
    ("benchmark = translation\n\ncolour = red", 3, "unknown key"),
    ("benchmark = translation\nchi 0.5", 2, "key = value"),
    ("benchmark = vortex\nchi = 0.5\nchi = 0.4", 3, "duplicate"),
    ("benchmark = sloshing", 1, "benchmark"),
    ("benchmark = translation\npreset = DUGKS-IV", 2, "preset"),
    ("benchmark = translation\nvariant = B", 2, "custom"),
    ("benchmark = translation\npe = -3", 2, "pe"),
])
def test_config_errors_carry_line(text, line, msg):
    with pytest.raises(ConfigError, match=msg) as exc:
        parse_config(text, env={})
    assert exc.value.line == line
    assert f"line {line}" in str(exc.value)


def test_custom_preset():
    spec = parse_config("benchmark = zalesak\npreset = custom\nvariant = B\nflux_mode = linear",
                        env={})
    assert spec.preset is None
    assert (spec.variant, spec.flux_mode) == (Variant.B, FluxMode.LINEAR)
    assert spec.benchmark.L0 == 200.0


def test_env_and_set_overrides():
    env = {"DUGKS_CHI": "0.2", "DUGKS_PE": "500", "HOME": "/tmp"}
    spec = parse_config("benchmark = translation\nchi = 0.5", env=env)
    assert spec.chi == 0.2 and spec.Pe == 500.0
    spec = parse_config("benchmark = translation", env=env, overrides=["chi=0.8"])
    assert spec.chi == 0.8
    with pytest.raises(ConfigError, match="DUGKS_CHI"):
        parse_config("benchmark = translation", env={"DUGKS_CHI": "2"})
    with pytest.raises(ConfigError):
        parse_config("benchmark = translation", env={}, overrides=["nokey"])


def _cfg(tmp_path, extra="", periods=1):
    out = tmp_path / "out"
    return f"benchmark = translation\nl0 = 50\nperiods = {periods}\noutput = {out}\n{extra}", out


def test_run_smoke(tmp_path):
    text, out = _cfg(tmp_path)
    spec = parse_config(text, env={})
    assert spec.benchmark.grid().shape == (50, 50)
    assert run(spec, log=lambda m: None) == EXIT_OK
    rows = list(csv.reader(open(out / "errors.csv")))
    assert len(rows) == 2 and rows[1][0] == "1"
    assert 0 < float(rows[1][1]) < 0.5
    assert (out / "summary.txt").exists() and (out / "mass.csv").exists()


def test_runs_deterministic(tmp_path):
    outs = []
    for k in range(2):
        text = f"benchmark = translation\nl0 = 20\nperiods = 0.5\noutput = {tmp_path / str(k)}"
        assert run(parse_config(text, env={}), log=lambda m: None) == EXIT_OK
        outs.append(tmp_path / str(k))
    for name in ("errors.csv", "mass.csv", "extrema.csv", "phi_final.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_absurd_parameters_never_crash(tmp_path):
    text, out = _cfg(tmp_path, "pe = 1e6\nchi = 1.0\npreset = DUGKS-AC\nface_scheme = cdi2")
    logs = []
    code = run(parse_config(text, env={}), log=logs.append)
    assert code in (EXIT_OK, EXIT_DIVERGED)
    if code == EXIT_DIVERGED:
        assert "step" in logs[-1]
    assert (out / "summary.txt").exists()


def test_divergence_exit_code(tmp_path):
    text, out = _cfg(tmp_path, "u0 = 40\npreset = DUGKS-AC\nface_scheme = cdi2", periods=100)
    logs = []
    with np.errstate(all="ignore"):
        code = run(parse_config(text, env={}), log=logs.append)
    assert code == EXIT_DIVERGED
    assert "diverged at step" in logs[-1]
    assert "diverged_at_step" in (out / "summary.txt").read_text()


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    spec = parse_config(f"benchmark = translation\noutput = {blocker / 'sub'}", env={})
    assert run(spec, log=lambda m: None) == EXIT_CONFIG


def test_main_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("chi = 0.5\n")
    assert main(["run", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG
    good = tmp_path / "good.cfg"
    text, out = _cfg(tmp_path)
    good.write_text(text)
    assert main(["run", "--config", str(good), "--set", "periods=0.25"]) == EXIT_OK
    assert (out / "summary.txt").exists()
    with pytest.raises(SystemExit):
        main(["table", "--which", "table9", "--out", str(tmp_path)])


def test_convergence_command(tmp_path):
    assert main(["convergence", "--preset", "DUGKS-I", "--out", str(tmp_path), "--grids", "16,32"]) == 0
    rows = read_table(tmp_path / "convergence_DUGKS-I.csv")
    assert [r["grid"] for r in rows] == ["16", "32"]
    assert main(["convergence", "--preset", "DUGKS-I", "--out", str(tmp_path),
                 "--scheme", "weno9"]) == EXIT_CONFIG


def test_table_matrix():
    assert len(table_cells("table1")) == 12
    t3 = [c for c in table_cells("table3") if c.preset == "DUGKS-I"]
    assert [c.column for c in t3] == [0.1, 0.2, 0.4, 0.5, 0.8, 1.0]
    t4 = table_cells("table4")
    assert {c.case.L0 for c in t4} == {50.0, 100.0, 200.0, 400.0}
    assert all(c.W == pytest.approx(0.015 * c.case.L0) and c.periods == 1.0 for c in t4)
    assert all(c.periods == 10.0 for c in table_cells("table2"))
    assert table_cells("table2", periods=0.1)[0].periods == 0.1
    with pytest.raises(ValueError):
        table_cells("table5")
    assert set(TABLES) == set(PUBLISHED)
    assert PUBLISHED["table2"][("DUGKS-AC", 500)] == 0.0577


def test_table_driver_short(tmp_path):
    rows = table_driver("table4", tmp_path, periods=0.01)
    assert len(rows) == 12
    assert all(r["status"] == "ok" and r["L2"] > 0 for r in rows)
    back = read_table(tmp_path / "table4.csv")
    for r, b in zip(rows, back):
        assert float(b["L2"]) == r["L2"]
        assert float(b["published"]) == r["published"]
        assert b["order"] == "nan" or float(b["order"]) == r["order"]


def test_run_cell_reports_failure():
    from dugks.benchmarks import BenchmarkCase
    cell = Cell("table1", "DUGKS-I", "x", BenchmarkCase.translation(L0=20.0), W=-1.0, periods=0.1)
    row = run_cell(cell)
    assert math.isnan(row["L2"]) and row["status"].startswith("error")


def test_write_table_17_digits(tmp_path):
    vals = [1 / 3, 2.0**-40, 0.1 + 0.2, math.pi * 1e7]
    rows = [{"a": v, "b": f"s{k}", "c": k} for k, v in enumerate(vals)]
    back = read_table(write_table(rows, tmp_path / "t.csv"))
    assert [float(r["a"]) for r in back] == vals
    assert [r["b"] for r in back] == ["s0", "s1", "s2", "s3"]
