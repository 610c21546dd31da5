import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from csvt import cli, synth


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def mixture_file(tmp_path):
    rng = synth.make_rng(4)
    design = synth.make_design(600, 12, 3, 1.0, rng)
    X, labels = synth.sample_dataset(design, synth.UNIT_NOISE, rng)
    path = tmp_path / "mix.csv"
    synth.export_dataset(X, path, labels)
    return path, X


def test_estimate_text(mixture_file, capsys):
    code, out, _ = run(["estimate", "--input", str(mixture_file[0])], capsys)
    assert code == 0
    assert out.splitlines()[0].split() == ["K_hat", "3"]
    assert "threshold" in out


def test_estimate_json(mixture_file, capsys):
    path, X = mixture_file
    code, out, _ = run(["estimate", "--input", str(path), "--json", "--strategy", "gram"], capsys)
    assert code == 0
    data = json.loads(out)
    assert data["k_hat"] == 3 and data["r"] == 2
    assert (data["p"], data["n"]) == X.shape
    assert data["strategy"] == "gram_rows"
    sv = np.linalg.svd(X - X.mean(axis=1, keepdims=True), compute_uv=False)
    assert np.allclose(data["singular_values"], sv, rtol=1e-9)


def test_json_uses_17_digits():
    assert cli.dumps17({"a": 0.1, "b": [1, None, True]}) == '{"a": 0.10000000000000001, "b": [1, null, true]}'
    assert cli.dumps17(float("nan")) == "null"


def test_estimate_explicit_tn(mixture_file, capsys):
    code, out, _ = run(["estimate", "--input", str(mixture_file[0]), "--tn", "1e6", "--json"], capsys)
    assert json.loads(out)["k_hat"] == 1


def test_estimate_bad_file(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("1,2\nx,3\n")
    code, _, err = run(["estimate", "--input", str(path)], capsys)
    assert code == 1
    assert "column 1" in err


def test_estimate_missing_file(tmp_path, capsys):
    code, _, err = run(["estimate", "--input", str(tmp_path / "none.csv")], capsys)
    assert code == 1 and "no such file" in err


def test_realdata_skipped(tmp_path, capsys):
    code, out, _ = run(["realdata", "--preset", "usps", "--input", str(tmp_path / "usps.csv")], capsys)
    assert code == 0 and "SKIPPED" in out


def test_realdata_iris(tmp_path, capsys):
    datasets = pytest.importorskip("sklearn.datasets")
    data = datasets.load_iris()
    path = tmp_path / "iris.csv"
    np.savetxt(path, np.column_stack([data.data, data.target]), delimiter=",", fmt="%.17g")
    code, out, _ = run(["realdata", "--preset", "iris", "--input", str(path)], capsys)
    assert code == 0
    assert out.startswith("iris: PASS")


@pytest.mark.parametrize("which", ["fig1", "remark2", "pathology"])
def test_demo_csv(which, capsys):
    code, out, _ = run(["demo", "--which", which, "--seed", "3"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["index", "sigma_raw", "sigma_centered", "threshold"]
    assert len({r[3] for r in rows[1:]}) == 1


def test_demo_output_file(tmp_path, capsys):
    path = tmp_path / "fig1.csv"
    code, out, _ = run(["demo", "--which", "fig1", "--output", str(path)], capsys)
    assert code == 0 and out == ""
    assert len(path.read_text().splitlines()) == 21


def test_verify(capsys):
    code, out, _ = run(["verify", "--seed", "1"], capsys)
    assert code == 0
    assert out.count("PASS") == 7 and "FAIL" not in out


def test_simulate_writes_results(tmp_path, capsys):
    path = tmp_path / "exp2.json"
    code, out, _ = run(["simulate", "--experiment", "exp2_k_growth", "--reps", "1",
                        "--output", str(path), "--format", "json"], capsys)
    assert code == 0
    data = json.loads(path.read_text())
    assert len(data) == 11
    assert data[0]["n"] == 2000 and data[0]["p"] == 100
    assert len(out.splitlines()) == 11


def test_simulate_error_exit_code(capsys):
    # scaling p down to 5 makes K=10 and up infeasible
    code, out, _ = run(["simulate", "--experiment", "exp2_k_growth", "--scale", "0.05", "--reps", "1"], capsys)
    assert code == 2
    assert "ERROR infeasible" in out


def test_simulate_custom_rejected(capsys):
    code, _, err = run(["simulate", "--experiment", "custom"], capsys)
    assert code == 2 and "Python" in err


def test_module_entry_point(mixture_file):
    res = subprocess.run([sys.executable, "-m", "csvt", "estimate", "--input", str(mixture_file[0]), "--json"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["k_hat"] == 3
