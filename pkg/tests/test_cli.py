import csv
import math

import numpy as np
import pytest

from fxts import cli
from fxts import experiments as ex
from fxts.core import FxtsGains


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_defaults_follow_case_study():
    c = ex.ExperimentConfig()
    assert (c.mu, c.p_u, c.p1, c.q1, c.x0) == (2.0, (1.0,), 100.0, 1000.0, (3.33, 1.33))
    assert c.u_max_list[0] == 16 and c.u_max_list[-1] == 25 and len(c.u_max_list) == 10
    assert c.t_bar_list[0] == 1 and c.t_bar_list[-1] == 10 and len(c.t_bar_list) == 10


def test_cert_global(capsys):
    assert cli.main(["cert", "--alpha1", "1", "--alpha2", "1", "--delta1", "0", "--mu", "2"]) == 0
    first = capsys.readouterr().out.splitlines()[0]
    assert first == f"global, T <= {ex.fmt(math.pi)}"


def test_cert_local_level_csv(capsys):
    assert cli.main(["cert", "--delta1", "2.5", "--k", "1", "--format", "csv"]) == 0
    header, values = capsys.readouterr().out.splitlines()
    row = dict(zip(header.split(","), values.split(",")))
    assert float(row["domain_level"]) == pytest.approx(0.25, rel=1e-12)
    assert row["regime"] == "Supercritical"


def test_cert_oracle_line(capsys):
    assert cli.main(["cert", "--delta1", "1", "--v0", "1"]) == 0
    line = [s for s in capsys.readouterr().out.splitlines() if s.startswith("oracle")][0]
    report = ex.cert_report(FxtsGains(1, 1, 1, 2), v0=1.0)
    assert report["oracle"] <= report["bound"]
    assert ex.fmt(report["oracle"]) in line and ex.fmt(report["bound"]) in line and " <= " in line


def test_cert_bad_gains_is_config_error(capsys):
    assert cli.main(["cert", "--alpha1", "-1"]) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_doa_radii(tmp_path, capsys):
    r = ex.doa_radii([1.0, 2.0, 3.0, 10.0], 2.0)
    assert r[0] == 1.0
    assert r[1] == pytest.approx(2 - math.sqrt(3), rel=1e-12)
    assert r[1] == pytest.approx(0.2679, abs=1e-4)
    assert all(a > b for a, b in zip(r, r[1:]))
    assert cli.main(["doa-figure", "--r-m-list", "1,2,3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "doa.svg").read_text().lstrip().startswith("<?xml")
    assert cli.main(["doa-figure", "--r-m-list", "0.5", "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_single_point_sweep(tmp_path):
    assert cli.main(["sweep-umax", "--u-max-list", "20", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "sweep_umax.csv")
    assert len(rows) == 1
    assert list(rows[0]) == list(ex.SWEEP_UMAX_COLUMNS)
    for name in ("sweep_umax.svg", "sweep_umax_inputs.svg"):
        assert (tmp_path / name).exists()


def test_sweep_t_columns_and_alpha(tmp_path):
    assert cli.main(["sweep-T", "--t-bar-list", "1 2.5", "--t-end", "1", "--out", str(tmp_path)]) == 0
    rows = read_rows(tmp_path / "sweep_T.csv")
    assert list(rows[0]) == list(ex.SWEEP_T_COLUMNS)
    for row in rows:
        assert float(row["alpha1"]) == pytest.approx(math.pi / float(row["T_bar"]), rel=1e-11)


def test_t_sweep_first_point_matches_umax_run():
    cfg = ex.ExperimentConfig(t_bar_list=(1.0,), u_max_list=(16.0,), t_end=1.0)
    a = ex.sweep_T(cfg)[0].trajectory
    b = ex.sweep_umax(cfg)[0].trajectory
    for name in ("times", "states", "inputs", "delta1_values", "h_values"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_max_delta1_is_trace_max():
    cfg = ex.ExperimentConfig(u_max_list=(16.0, 21.0), t_end=1.0)
    results = ex.sweep_umax(cfg)
    for res, row in zip(results, ex.sweep_rows(results, "u_max")):
        assert row["max_delta1"] == np.max(res.trajectory.delta1_values)


def test_parallel_matches_serial():
    cfg = ex.ExperimentConfig(u_max_list=(16.0, 20.0), t_end=0.5)
    serial = ex.sweep_rows(ex.sweep_umax(cfg), "u_max")
    par = ex.sweep_rows(ex.sweep_umax(ex.ExperimentConfig(u_max_list=(16.0, 20.0), t_end=0.5, workers=2)), "u_max")
    assert serial == par


def test_outputs_are_deterministic(tmp_path):
    args = ["sweep-umax", "--u-max-list", "16,25", "--t-end", "0.6"]
    for d in ("a", "b"):
        assert cli.main(args + ["--out", str(tmp_path / d)]) == 0
    for name in ("sweep_umax.csv", "sweep_umax.svg", "sweep_umax_inputs.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_csv_number_format(tmp_path):
    ex.write_csv(tmp_path / "x.csv", ("a", "b"), [{"a": 1 / 3, "b": True}])
    assert (tmp_path / "x.csv").read_text() == "a,b\n0.333333333333,1\n"


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "run.ini"
    conf.write_text("[experiment]\nu_max = 25\nt_end = 0.5\n\n[output]\nout = %s\n" % (tmp_path / "o"))
    assert cli.main(["simulate", "--config", str(conf)]) == 0
    assert (tmp_path / "o" / "trajectory_umax25_T1.csv").exists()
    assert cli.main(["simulate", "--config", str(conf), "--u-max", "18"]) == 0
    path = tmp_path / "o" / "trajectory_umax18_T1.csv"
    rows = read_rows(path)
    assert list(rows[0]) == ["t", "x1", "x2", "u1", "delta1", "h_G"]
    assert float(rows[-1]["t"]) == pytest.approx(0.5)
    assert max(abs(float(r["u1"])) for r in rows) <= 18 + 1e-6


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("[x]\nbogus = 1\n")
    assert cli.main(["simulate", "--config", str(bad)]) == cli.EXIT_CONFIG
    assert cli.main(["simulate", "--config", str(tmp_path / "missing.ini")]) == cli.EXIT_CONFIG
    assert cli.main(["simulate", "--dt", "abc"]) == cli.EXIT_CONFIG
    assert cli.main(["simulate", "--model", "nope"]) == cli.EXIT_CONFIG


def test_open_loop_exit_code(tmp_path, capsys):
    assert cli.main(["simulate", "--open-loop", "--out", str(tmp_path)]) == cli.EXIT_DIVERGED
    assert (tmp_path / "trajectory_open_loop.csv").exists()
    assert "diverged=True" in capsys.readouterr().out


def test_all_runs_diverged_exit_code(tmp_path):
    assert cli.main(["sweep-umax", "--u-max-list", "8 10", "--out", str(tmp_path)]) == cli.EXIT_DIVERGED
    rows = read_rows(tmp_path / "sweep_umax.csv")
    assert [r["diverged"] for r in rows] == ["1", "1"]
