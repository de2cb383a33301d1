from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from markov_xact.cli import main
from markov_xact.core import format_matrix, write_matrix
from markov_xact.sampling import RandomSource, random_reversible

from .conftest import P0


@pytest.fixture
def p0_file(tmp_path):
    path = tmp_path / "p0.txt"
    write_matrix(path, P0)
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_gaps(p0_file, capsys):
    code, out, _ = run(["gaps", p0_file], capsys)
    assert code == 0
    assert '"eta_p": 1.732050' in out and '"eta_a": 0.0' in out
    assert json.loads(out)["eta"] is None


def test_verify_random_reversible(tmp_path, capsys):
    path = tmp_path / "random.txt"
    write_matrix(path, random_reversible(6, RandomSource(1)))
    code, out, _ = run(["verify", str(path), "--tol", "1e-8"], capsys)
    assert code == 0 and json.loads(out)["passed"] is True


def test_verify_failure_exit_code(tmp_path, capsys):
    path = tmp_path / "random.txt"
    write_matrix(path, random_reversible(6, RandomSource(1)))
    code, _, err = run(["verify", str(path), "--tol", "-1"], capsys)
    assert code == 2 and err.startswith("ERROR verification_failed")


def test_missing_config(tmp_path, capsys):
    code, _, err = run(["experiment", "--config", str(tmp_path / "missing.json")], capsys)
    assert code == 1 and "ERROR config_not_found" in err


def test_invalid_matrix(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("2\n0.5 0.6\n0.7 0.3\n")
    code, _, err = run(["gaps", str(path)], capsys)
    assert code == 1 and err.startswith("ERROR ")


def test_estimate_mle(tmp_path, capsys):
    path = tmp_path / "path.txt"
    path.write_text("0 1 0 1 0\n")
    code, out, _ = run(["estimate", "--method", "mle", "--path", str(path)], capsys)
    assert code == 0
    assert out == "method=MLE n=4 seed=none\n" + format_matrix([[0, 0.5], [0.5, 0]])


def test_estimate_sce_deterministic(p0_file, tmp_path, capsys):
    args = ["estimate", "--method", "sce", "--matrix", p0_file, "--n", "50", "--seed", "4"]
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "method=SCE n=50 seed=4" and lines[1] == "3"
    joint = np.array([[float(x) for x in ln.split()] for ln in lines[2:]])
    np.testing.assert_array_equal(joint, joint.T)


def test_bound_output(capsys):
    code, out, _ = run(["bound", "--method", "mle", "--n", "10000", "--t", "0.05",
                        "--gap", "0.5", "--sigma2", "0.1"], capsys)
    assert code == 0 and out == "3.85742e-01\n"
    code, out, _ = run(["bound", "--method", "sce-mse", "--n", "1000", "--gap", "0.5"], capsys)
    assert out == "7.00000e-03\n"


def test_bound_missing_argument(capsys):
    code, _, err = run(["bound", "--method", "sce", "--n", "10"], capsys)
    assert code == 1 and "--t" in err


def test_experiment_csv_reproducible(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"d_values": [3], "eta_values": [0.4], "n_values": [100, 200],
                               "trials": 20, "base_seed": 5}))
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].decode().splitlines()[0] == "method,d,eta,n,trials,mse,mse_stderr,bound,seed"
    out = tmp_path / "r.csv"
    assert main(["experiment", "--config", str(cfg), "--ratio", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 3


def test_console_entry_point(p0_file):
    proc = subprocess.run([sys.executable, "-m", "markov_xact", "gaps", p0_file],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "eta_p" in proc.stdout
