import json
import math
import subprocess
import sys

import numpy as np
import pytest

from chiral_skyrmion.cli import (
    analyze_reports,
    dumps,
    format_config,
    parse_config,
    run,
)


def solve(tmp_path, *extra, name="a"):
    out, rep = tmp_path / f"{name}.csv", tmp_path / f"{name}.json"
    code = run(["solve", "--k", "0.1", "--out", str(out), "--report", str(rep), *extra])
    return code, out, rep


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    d = tmp_path_factory.mktemp("solve")
    code, out, rep = solve(d)
    return code, out, rep, d


def test_solve_outputs(solved):
    code, out, rep, _ = solved
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "r,u,du_dr,xi,dxi_dr"
    assert len(lines) == 2001
    first = [float(x) for x in lines[1].split(",")]
    assert abs(first[1] - math.pi) <= 1e-5
    assert float(lines[-1].split(",")[1]) == 0.0


def test_report_keys_and_totals(solved):
    data = json.loads(solved[2].read_text())
    assert set(data) == {"params", "grid", "energies", "convergence", "perturbation"}
    e = data["energies"]
    p = data["params"]
    total = e["exchange"] + p["beta"] * p["k"] * e["dm"] + p["beta"] ** 2 * e["aniso"]
    assert e["total"] == pytest.approx(total, rel=1e-14)
    assert data["convergence"]["converged"] is True
    assert data["convergence"]["residual_sup"] <= 1e-9
    assert p["beta_mode"] == "auto"
    assert set(data["perturbation"]) == {"mu", "beta", "norm_X", "norm_Xinf", "relation_gap",
                                         "energy_deficit_ratio"}


def test_deterministic(solved, tmp_path):
    _, out, rep, _ = solved
    code, out2, rep2 = solve(tmp_path, name="b")
    assert code == 0
    assert out.read_bytes() == out2.read_bytes()
    a, b = json.loads(rep.read_text()), json.loads(rep2.read_text())
    for d in (a, b):
        del d["params"]["config"]["out"], d["params"]["config"]["report"]
    assert a == b


def test_config_file(tmp_path, solved):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# point\nk = 0.1\nout = {tmp_path / 'c.csv'}\nreport = {tmp_path / 'c.json'}\n")
    assert run(["solve", "--config", str(cfg)]) == 0
    assert (tmp_path / "c.csv").read_bytes() == solved[1].read_bytes()


def test_config_roundtrip():
    cfg = {"k": 0.1, "alpha": -0.5, "beta": "auto", "grid_n": 1000, "out": "x.csv"}
    assert parse_config(format_config(cfg)) == cfg


@pytest.mark.parametrize("text", ["k 0.1", "bogus = 1", "grid_n = many"])
def test_config_errors(tmp_path, capsys, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text + "\n")
    assert run(["solve", "--config", str(cfg)]) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["exit_code"] == 2


@pytest.mark.parametrize("argv", [
    ["solve", "--k", "1.5", "--out", "x.csv", "--report", "x.json"],
    ["solve", "--k", "0.1"],
    ["bogus"],
    [],
    ["solve", "--k", "0.1", "--beta", "abc", "--out", "x", "--report", "y"],
])
def test_usage_exit(argv, capsys):
    assert run(argv) == 2
    assert "error" in json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_nonconvergence_exit(tmp_path, capsys):
    code, out, rep = solve(tmp_path, "--max-iters", "1", "--tol", "1e-300")
    assert code == 3
    assert json.loads(rep.read_text())["convergence"]["converged"] is False
    assert json.loads(capsys.readouterr().err.strip())["error"] == "convergence"


def test_dumps_floats():
    text = dumps({"a": 0.1, "b": [1, True, None], "c": float("nan")})
    data = json.loads(text)
    assert data == {"a": 0.1, "b": [1, True, None], "c": None}
    assert "0.10000000000000001" in text


@pytest.fixture(scope="module")
def swept(tmp_path_factory):
    d = tmp_path_factory.mktemp("sweep")
    code = run(["sweep", "--k-list", "0.3,0.2,0.1", "--out-dir", str(d), "--workers", "2"])
    return code, d


def test_sweep(swept):
    code, d = swept
    assert code == 0
    index = json.loads((d / "sweep.json").read_text())
    assert [p["k"] for p in index["points"]] == [0.3, 0.2, 0.1]
    for p in index["points"]:
        assert (d / p["csv"]).exists() and (d / p["report"]).exists()


def test_sweep_matches_single(swept, solved):
    _, d = swept
    assert (d / "k_0.1.csv").read_bytes() == solved[1].read_bytes()


def test_analyze_and_report(swept, tmp_path):
    _, d = swept
    out = tmp_path / "analysis.json"
    assert run(["analyze", "--in-dir", str(d), "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert [r["k"] for r in data["records"]] == [0.3, 0.2, 0.1]
    assert data["summary"]["norm_X_no_growth"] is True
    plots = tmp_path / "plots"
    assert run(["report", "--in", str(out), "--plots", str(plots)]) == 0
    for name in ("relation_gap", "norms", "energy_ratio"):
        assert (plots / f"{name}.gp").exists()
        rows = np.loadtxt(plots / f"{name}.dat")
        assert rows.shape == (3, 2)


def test_report_from_solve(solved, tmp_path):
    _, _, rep, _ = solved
    assert run(["report", "--in", str(rep), "--plots", str(tmp_path)]) == 0
    assert (tmp_path / "energies.gp").exists()
    assert (tmp_path / "profile.gp").exists()


def test_analyze_empty_dir(tmp_path):
    assert run(["analyze", "--in-dir", str(tmp_path), "--out", str(tmp_path / "a.json")]) == 2


def test_analyze_reports_without_perturbation():
    rep = {"params": {"k": 0.1, "alpha": 0.0, "beta": 0.02}, "energies": {"total": 1.99},
           "perturbation": {"beta": None}}
    out = analyze_reports([rep])
    assert out["summary"] == {}
    assert out["records"][0]["energy_deficit_ratio"] > 0


def test_verify_integrals(capsys):
    assert run(["verify", "integrals"]) == 0
    assert "PASS" in capsys.readouterr().out


def test_module_entry():
    out = subprocess.run([sys.executable, "-m", "chiral_skyrmion", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
