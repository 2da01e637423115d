import json
import math
import subprocess
import sys

import numpy as np
import pytest

from grlmp import cli

POWER = {"family": "univariate", "op": "multiplication", "c": 1.0, "b": 2.0}
BIV = {"family": "bivariate", "op": "multiplication", "lambda1": 1.0, "lambda2": 1.0,
       "lambda12": 1.0, "b": 2.0}
ADD_BIV = {"family": "bivariate", "op": "addition", "lambda1": 1.0, "lambda2": 1.0,
           "lambda12": 1.0, "b": 0.0}


def write_spec(tmp_path, spec, name="spec.json"):
    p = tmp_path / name
    p.write_text(json.dumps(spec))
    return str(p)


def run(*argv):
    return cli.main([str(a) for a in argv])


# catalog ------------------------------------------------------------------------------


def test_catalog_text(capsys):
    assert run("catalog") == 0
    out = capsys.readouterr().out
    assert "(x/b)^c" in out
    assert out.count("[bivariate") == 4 and out.count("[univariate") == 4


def test_catalog_json_round_trips_into_sample(tmp_path):
    out = tmp_path / "cat.json"
    assert run("catalog", "--format", "json", "--out", out) == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 8
    for i, row in enumerate(rows):
        spec = write_spec(tmp_path, row["spec"], f"s{i}.json")
        assert run("sample", "--spec", spec, "--n", 5, "--seed", 1, "--out", tmp_path / f"d{i}.csv") == 0


# sample ------------------------------------------------------------------------------


def test_sample_is_byte_identical(tmp_path):
    spec = write_spec(tmp_path, BIV)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("sample", "--spec", spec, "--seed", 42, "--n", 200, "--out", a) == 0
    assert run("sample", "--spec", spec, "--seed", 42, "--n", 200, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    meta_a = (tmp_path / "a.csv.meta.json").read_text()
    assert meta_a == (tmp_path / "b.csv.meta.json").read_text()
    meta = json.loads(meta_a)
    assert meta["seed"] == 42 and meta["n"] == 200 and meta["spec"] == BIV and meta["version"]
    lines = a.read_text().splitlines()
    assert lines[0] == "x1,x2" and len(lines) == 201


def test_sample_floats_round_trip(tmp_path):
    spec = write_spec(tmp_path, POWER)
    out = tmp_path / "x.csv"
    run("sample", "--spec", spec, "--seed", 3, "--n", 50, "--out", out)
    from grlmp import specs

    _, d = specs.load(spec)
    expected = d.sample(np.random.default_rng(3), 50)
    got = np.loadtxt(out, skiprows=1)
    np.testing.assert_array_equal(got, expected)


def test_sample_seed_from_environment(tmp_path, monkeypatch):
    spec = write_spec(tmp_path, POWER)
    monkeypatch.setenv(cli.SEED_ENV, "7")
    run("sample", "--spec", spec, "--n", 10, "--out", tmp_path / "env.csv")
    run("sample", "--spec", spec, "--n", 10, "--seed", 7, "--out", tmp_path / "flag.csv")
    assert (tmp_path / "env.csv").read_bytes() == (tmp_path / "flag.csv").read_bytes()
    assert json.loads((tmp_path / "env.csv.meta.json").read_text())["seed"] == 7


def test_sample_n_zero_exits_2(tmp_path, capsys):
    spec = write_spec(tmp_path, POWER)
    assert run("sample", "--spec", spec, "--n", 0, "--out", tmp_path / "x.csv") == 2
    err = capsys.readouterr().err
    assert "n must be ≥ 1" in err and err.count("\n") == 1


@pytest.mark.parametrize("bad", [
    {"family": "univariate", "op": "multiplication", "c": -1.0, "b": 2.0},
    {"family": "univariate", "op": "division", "c": 1.0, "b": 2.0},
    {"family": "univariate", "op": "multiplication", "c": 1.0},
    {"family": "trivariate"},
])
def test_sample_invalid_spec_exits_2(tmp_path, bad):
    spec = write_spec(tmp_path, bad)
    assert run("sample", "--spec", spec, "--n", 5, "--out", tmp_path / "x.csv") == 2


def test_sample_bad_seed_exits_2(tmp_path):
    spec = write_spec(tmp_path, POWER)
    assert run("sample", "--spec", spec, "--seed", "-1", "--out", tmp_path / "x.csv") == 2
    assert run("sample", "--spec", spec, "--seed", "abc", "--out", tmp_path / "x.csv") == 2


# eval ------------------------------------------------------------------------------------


def test_eval_inline_points(tmp_path, capsys):
    spec = write_spec(tmp_path, POWER)
    assert run("eval", "--spec", spec, "--points", "1.0;2.0") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "x,value,error"
    assert float(lines[1].split(",")[1]) == pytest.approx(0.5, abs=1e-15)
    assert lines[2] == "2.0,1.0,"


def test_eval_bivariate_json(tmp_path):
    spec = write_spec(tmp_path, ADD_BIV)
    out = tmp_path / "v.json"
    assert run("eval", "--spec", spec, "--points=-1,-2", "--format", "json", "--out", out) == 0
    rows = json.loads(out.read_text())["rows"]
    # common shock enters through min(s1, s2)
    assert rows[0]["value"] == pytest.approx(math.exp(-5), rel=1e-14)


def test_eval_points_file_with_header(tmp_path):
    spec = write_spec(tmp_path, BIV)
    pts = tmp_path / "pts.csv"
    pts.write_text("x1,x2\n0.5,1.5\n1.0,1.0\n")
    out = tmp_path / "v.csv"
    assert run("eval", "--spec", spec, "--points", pts, "--fn", "pdf", "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[1].split(",")[3] == "" and lines[2].split(",")[2] == ""
    assert "diagonal" in lines[2]


def test_eval_quantile_error_column(tmp_path, capsys):
    spec = write_spec(tmp_path, POWER)
    assert run("eval", "--spec", spec, "--points", "0;0.5", "--fn", "quantile") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1] == "0.0,,p out of range"
    assert float(lines[2].split(",")[1]) == pytest.approx(1.0, abs=1e-15)


def test_eval_all_points_failing_exits_2(tmp_path):
    spec = write_spec(tmp_path, POWER)
    assert run("eval", "--spec", spec, "--points", "0;5", "--fn", "quantile") == 2
    assert run("eval", "--spec", spec, "--points", "abc") == 2


def test_eval_is_byte_identical(tmp_path):
    spec = write_spec(tmp_path, POWER)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        run("eval", "--spec", spec, "--points", "0.3;0.7;1.9", "--fn", "rhr", "--out", out)
    assert a.read_bytes() == b.read_bytes()


# fit ---------------------------------------------------------------------------------------


def test_fit_two_points(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("x\n1.0\n0.0\n")
    out = tmp_path / "fit.json"
    assert run("fit", "--data", data, "--op", "addition", "--b", "2", "--out", out) == 0
    assert json.loads(out.read_text())["c_hat"] == pytest.approx(2 / 3, rel=1e-15)


def test_fit_recovers_sampled_parameters_with_provenance(tmp_path):
    spec = write_spec(tmp_path, {**BIV, "lambda1": 3.0, "lambda12": 4.0})
    data, out = tmp_path / "d.csv", tmp_path / "fit.json"
    run("sample", "--spec", spec, "--seed", 5, "--n", 100000, "--out", data)
    assert run("fit", "--data", data, "--op", "multiplication", "--out", out) == 0
    rep = json.loads(out.read_text())
    assert abs(rep["lambda1_hat"] - 3) <= 0.15 and abs(rep["lambda12_hat"] - 4) <= 0.2
    assert rep["provenance"]["seed"] == 5
    assert rep["warnings"] == []


def test_fit_empty_file_exits_3(tmp_path):
    data = tmp_path / "empty.csv"
    data.write_text("")
    assert run("fit", "--data", data, "--op", "addition") == 3
    data.write_text("x\n")
    assert run("fit", "--data", data, "--op", "addition") == 3


def test_fit_degenerate_data_exits_3(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("1.0\n1.0\n")
    assert run("fit", "--data", data, "--op", "multiplication") == 3


def test_fit_bad_data_exits_2(tmp_path):
    data = tmp_path / "d.csv"
    data.write_text("1.0\n-1.0\n")
    assert run("fit", "--data", data, "--op", "multiplication") == 2
    assert run("fit", "--data", tmp_path / "missing.csv", "--op", "addition") == 2


# verify ------------------------------------------------------------------------------


def test_verify_passes(tmp_path):
    spec = write_spec(tmp_path, BIV)
    out = tmp_path / "v.json"
    assert run("verify", "--spec", spec, "--seed", 1, "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["pass"] is True
    names = {c["name"] for c in rep["checks"]}
    assert {"gbrlmp_residual", "ks_max", "tie_fraction", "mass_balance"} <= names
    for c in rep["checks"]:
        assert set(c) >= {"name", "statistic", "threshold", "pass"}


def test_verify_univariate_and_truncated(tmp_path):
    for spec in (POWER, {**POWER, "truncated": True}):
        path = write_spec(tmp_path, spec)
        assert run("verify", "--spec", path, "--seed", 2, "--out", tmp_path / "v.json") == 0


def test_verify_suite_selection(tmp_path):
    spec = write_spec(tmp_path, BIV)
    out = tmp_path / "v.json"
    assert run("verify", "--spec", spec, "--suite", "ties,max", "--out", out) == 0
    names = [c["name"] for c in json.loads(out.read_text())["checks"]]
    assert names == ["ks_max", "tie_fraction"]
    assert run("verify", "--spec", spec, "--suite", "bogus") == 2


def test_verify_corrupted_cdf_exits_1(tmp_path, capsys):
    for base in (POWER, BIV):
        spec = write_spec(tmp_path, {**base, "test_hook": {"corrupt_cdf_constant": 1.3}})
        out = tmp_path / "v.json"
        assert run("verify", "--spec", spec, "--suite", "grlmp,gbrlmp", "--out", out) == 1
        assert "residual" in capsys.readouterr().err
        assert json.loads(out.read_text())["pass"] is False


def test_verify_is_byte_identical(tmp_path):
    spec = write_spec(tmp_path, BIV)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        run("verify", "--spec", spec, "--seed", 9, "--n", 5000, "--out", out)
    assert a.read_bytes() == b.read_bytes()


# decompose ------------------------------------------------------------------------


def test_decompose_power_function(tmp_path):
    spec = write_spec(tmp_path, {**BIV, "truncated": True})
    out = tmp_path / "d.json"
    assert run("decompose", "--spec", spec, "--out", out) == 0
    rep = json.loads(out.read_text())
    atom = next(a for a in rep["atom_masses"] if a["location"] == [1.0, 1.0])
    assert atom["mass"] == pytest.approx(0.125, abs=1e-9)
    assert abs(rep["total"] - 1) <= 1e-3


def test_decompose_quadrature_failure_exits_4(tmp_path):
    spec = write_spec(tmp_path, {**ADD_BIV, "lambda1": 3.0, "lambda2": 2.0, "b": 4.0, "truncated": True})
    assert run("decompose", "--spec", spec, "--quad-nodes", 4) == 4


def test_decompose_requires_truncated_bivariate(tmp_path):
    assert run("decompose", "--spec", write_spec(tmp_path, BIV)) == 2
    assert run("decompose", "--spec", write_spec(tmp_path, {**POWER, "truncated": True})) == 2


def test_decompose_is_byte_identical(tmp_path):
    spec = write_spec(tmp_path, {**BIV, "truncated": True})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        run("decompose", "--spec", spec, "--out", out)
    assert a.read_bytes() == b.read_bytes()


def test_console_script_entry_point(tmp_path):
    spec = write_spec(tmp_path, POWER)
    res = subprocess.run(
        [sys.executable, "-m", "grlmp.cli", "sample", "--spec", spec, "--n", "0", "--out", str(tmp_path / "x")],
        capture_output=True, text=True,
    )
    assert res.returncode == 2
    assert res.stderr.strip() == "error: n must be ≥ 1"
