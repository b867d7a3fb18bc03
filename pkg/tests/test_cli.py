import json
import math

import pytest

from dbarg.cli import main, parse_complex, parse_range


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_parse_helpers():
    assert parse_range("-6..6") == list(range(-6, 7))
    assert parse_range("3") == [3]
    assert parse_range("1,4,9") == [1, 4, 9]
    assert parse_complex("1+2i") == 1 + 2j


def test_radii_report_shape(capsys):
    code, rep = report(capsys, "radii")
    assert code == 0
    assert set(rep) == {"command", "config", "version", "results", "errors"}
    assert rep["results"] == [{"r1": 0.0, "r2": "inf", "class": "FullPlane"}]
    assert rep["errors"] == []


def test_moments_match_oracle(capsys):
    code, rep = report(capsys, "moments", "--n", "-6..6")
    assert code == 0
    assert [r["n"] for r in rep["results"]] == list(range(-6, 7))
    assert max(r["rel_err"] for r in rep["results"]) <= 1e-8


def test_ring_demo_csv(capsys):
    code, out, _ = run(capsys, "ring-demo", "--variant", "exterior", "--q", "2", "--steps", "10",
                       "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "step,lo,hi"
    assert lines[-1] == "10,0.0,1024.0"


def test_usage_error(capsys):
    code, _, err = run(capsys, "radii", "--bogus")
    assert code == 64 and "usage" in err
    assert run(capsys, "frobnicate")[0] == 64
    assert run(capsys, "radii", "--psi", "expoly")[0] == 64


def test_domain_errors(capsys):
    code, rep = report(capsys, "radii", "--psi", "expoly", "--coeffs", "0,0,1")
    assert code == 2
    assert rep["errors"][0]["code"] == "InvalidSpec"
    code, rep = report(capsys, "coherent", "--z", "0")
    assert code == 2 and rep["errors"][0]["code"] == "ZeroPoint"


def test_kernel_value(capsys):
    code, rep = report(capsys, "kernel", "--x", "1")
    assert code == 0
    assert rep["results"][0]["G"] == pytest.approx(3.28326512131030773, rel=1e-14)


def test_transport_command(capsys):
    code, rep = report(capsys, "transport", "--choice", "[[1,0],[1,1]]", "--n", "0..1")
    assert code == 0
    assert rep["results"][0]["M2"] == pytest.approx(1.0, rel=1e-12)
    assert rep["results"][0]["psi2_next"] == pytest.approx(1 + math.e, rel=1e-12)
    assert rep["results"][0]["recursion_rel"] <= 1e-6
    assert report(capsys, "transport", "--choice", "[[-1,0]]")[0] == 2


def test_custom_table(capsys, tmp_path):
    table = tmp_path / "psi.csv"
    table.write_text("x,psi\n" + "".join(f"{k / 2},{2 ** (k / 2)}\n" for k in range(-20, 21)))
    code, rep = report(capsys, "factorials", "--psi", "custom-table", "--table", str(table),
                       "--limit-minus", "0", "--limit-plus", "inf", "--nmin", "2", "--nmax", "3")
    assert code == 0
    by_n = {r["n"]: r for r in rep["results"]}
    assert by_n[3]["psi_factorial"] == pytest.approx(64.0, rel=1e-12)
    # limits are required for a table
    assert run(capsys, "radii", "--psi", "custom-table", "--table", str(table))[0] == 64


def test_determinism_and_output_file(capsys, tmp_path):
    path = tmp_path / "report.json"
    runs = []
    for _ in range(2):
        assert main(["parseval", "--trials", "3", "--seed", "7", "-o", str(path)]) == 0
        runs.append(path.read_bytes())
    assert capsys.readouterr().out == ""
    assert runs[0] == runs[1]
    assert json.loads(runs[0])["config"]["seed"] == 7


def test_timing_is_opt_in(capsys):
    assert "wall_clock_s" not in report(capsys, "radii")[1]
    assert "wall_clock_s" in report(capsys, "radii", "--timing")[1]


def test_config_file_and_env_override(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tol": 1e-6, "seed": 3}))
    code, rep = report(capsys, "radii", "--config", str(cfg))
    assert rep["config"]["quad_tol"] == 1e-6 and rep["config"]["series_tol"] == 1e-6
    other = tmp_path / "other.json"
    other.write_text(json.dumps({"seed": 11}))
    monkeypatch.setenv("DBARG_CONFIG", str(other))
    code, rep = report(capsys, "radii", "--config", str(cfg))
    assert rep["config"]["seed"] == 11
    # explicit flags still win over the file
    assert report(capsys, "radii", "--seed", "5")[1]["config"]["seed"] == 5


def test_bad_config_is_usage_error(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"frobnicate": 1}))
    assert run(capsys, "radii", "--config", str(cfg))[0] == 64


def test_selftest_node_cap_fails_with_convergence_code(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"max_nodes": 10}))
    monkeypatch.setenv("DBARG_CONFIG", str(cfg))
    code, out, err = run(capsys, "selftest")
    assert code == 3
    assert "QuadratureNoConvergence" in out
    assert "[FAIL]" in err


def test_selftest_loose_tolerance_passes(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tol": 0.1}))
    code, out, err = run(capsys, "selftest", "--config", str(cfg))
    assert code == 0
    assert err.count("[PASS]") == 13
