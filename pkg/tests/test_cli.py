"""End-to-end tests of the command line interface, run in process."""

import csv

import pytest

from conespline.cli import main


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


def test_approx_reference_run(capsys):
    code = main([
        "approx", "--fn", "f1", "--c", "-0.2", "--delta", "0.3",
        "--ninit", "20", "--c0", "10", "--tol", "0.02", "--grid", "10000",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "n_points: 65" in out
    assert "n_iterations: 3" in out
    assert "converged: True" in out


def test_min_reference_run(capsys):
    code = main([
        "min", "--fn", "hump", "--c", "-0.2", "--delta", "0.3",
        "--ninit", "20", "--c0", "10", "--tol", "0.02", "--grid", "10000",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "value: -1" in out
    assert "n_points: 43" in out
    assert "min_gap: 0 " in out


def test_approx_plot_data(tmp_path, capsys):
    outdir = tmp_path / "plotdata"
    code = main([
        "approx", "--fn", "f0", "--tol", "0.2", "--grid", "1000",
        "--plot-data", str(outdir),
    ])
    capsys.readouterr()
    assert code == 0
    knots = read_csv(outdir / "knots.csv")
    assert knots[0] == ["x", "value"]
    assert len(knots) > 21
    trace = read_csv(outdir / "trace.csv")
    assert trace[0] == ["level", "n_flagged"]
    assert (outdir / "approx.png").stat().st_size > 0


def test_min_plot_data(tmp_path, capsys):
    outdir = tmp_path / "mindata"
    code = main([
        "min", "--fn", "f1", "--c", "-0.2", "--delta", "0.3", "--tol", "0.02",
        "--grid", "0", "--plot-data", str(outdir),
    ])
    capsys.readouterr()
    assert code == 0
    trace = read_csv(outdir / "trace.csv")
    assert trace[0] == ["level", "n_plus", "n_minus", "running_min"]
    cells = read_csv(outdir / "candidates.csv")
    assert cells[0] == ["left", "right"]
    assert len(cells) == 3
    assert (outdir / "min.png").stat().st_size > 0


def test_bench_csv_and_figure(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    code = main([
        "bench", "--families", "hump,osc", "--trials", "3", "--seed", "5",
        "--tol", "1e-3", "--mode", "approx", "--out", str(out),
        "--grid", "2000", "--ninit", "20",
    ])
    stdout = capsys.readouterr().out
    assert code == 0
    rows = read_csv(out)
    assert rows[0] == ["family", "trial", "param", "tol", "n_points",
                       "n_iterations", "converged", "sup_error", "wall_time_s"]
    assert len(rows) == 1 + 6
    assert {r[0] for r in rows[1:]} == {"hump", "osc"}
    assert (tmp_path / "bench.png").stat().st_size > 0
    assert "rows written to" in stdout


def test_bench_min_mode(tmp_path, capsys):
    out = tmp_path / "benchmin.csv"
    code = main([
        "bench", "--families", "hump", "--trials", "2", "--seed", "5",
        "--tol", "1e-2", "--mode", "min", "--out", str(out),
        "--bf-grid", "10000", "--ninit", "20",
    ])
    capsys.readouterr()
    assert code == 0
    rows = read_csv(out)
    assert rows[0][7] == "min_gap"
    gaps = [float(r[7]) for r in rows[1:]]
    assert all(-1e-9 <= g <= 1e-2 for g in gaps)


def test_diag_cone(capsys):
    code = main(["diag", "cone", "--fn", "f0", "--ninit", "20", "--c0", "10"])
    out = capsys.readouterr().out
    assert code == 0
    assert "violated: False" in out


def test_diag_norms(capsys):
    code = main(["diag", "norms", "--fn", "f1", "--c", "-0.2", "--delta", "0.3"])
    out = capsys.readouterr().out
    assert code == 0
    assert "sup_norm_second: 11.1111" in out
    assert "half_quasinorm_second: 16" in out
    assert "spikiness: 2.777" in out


def test_diag_costbound(capsys):
    code = main([
        "diag", "costbound", "--fn", "f1", "--c", "-0.2", "--delta", "0.3",
        "--tol", "1e-2", "--mode", "min", "--grid", "10000",
    ])
    out = capsys.readouterr().out
    assert code == 0
    assert "cost_bound_approx:" in out
    assert "cost_bound_min:" in out


def test_validation_errors_exit_2(tmp_path, capsys):
    assert main(["approx", "--fn", "f0", "--tol", "-0.5"]) == 2
    assert "error:" in capsys.readouterr().err
    assert main([
        "bench", "--families", "nosuch", "--trials", "1", "--tol", "1e-3",
        "--out", str(tmp_path / "x.csv"),
    ]) == 2
    # Hump support falling outside the interval is a configuration error.
    assert main(["approx", "--fn", "f1", "--c", "0.9", "--tol", "0.02"]) == 2


def test_unwritable_output_exits_1(tmp_path, capsys):
    missing = tmp_path / "no" / "such" / "dir" / "out.csv"
    code = main([
        "bench", "--families", "hump", "--trials", "1", "--tol", "1e-2",
        "--out", str(missing), "--ninit", "20",
    ])
    capsys.readouterr()
    assert code == 1


def test_unknown_function_exits_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["approx", "--fn", "nope", "--tol", "0.02"])
    capsys.readouterr()
    assert info.value.code == 2
