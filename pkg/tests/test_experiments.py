from __future__ import annotations

import json
import math

import numpy as np
import pytest

from markov_xact.errors import InvalidInput
from markov_xact.experiments import (
    CSV_COLUMNS,
    ExperimentConfig,
    linear_fit_r2,
    ratio_summary,
    ratio_to_csv,
    records_to_csv,
    run_mse_experiment,
    worker_count,
)


def small_config(**kw):
    base = dict(d_values=[4], eta_values=[0.5], n_values=[200], trials=40, base_seed=3)
    base.update(kw)
    return ExperimentConfig(**base)


def test_mle_record_below_bound():
    cfg = ExperimentConfig(d_values=[10], eta_values=[0.5], n_values=[1000], trials=500,
                           methods=["MLE"], base_seed=11)
    (rec,) = run_mse_experiment(cfg)
    assert rec.method == "MLE" and rec.bound == pytest.approx(0.005)
    assert 0 < rec.mse <= rec.bound + 3 * rec.mse_stderr


def test_bitwise_reproducible_and_worker_independent():
    cfg = small_config(d_values=[3, 5], n_values=[100, 300], matrices_per_cell=2)
    a = records_to_csv(run_mse_experiment(cfg, workers=1))
    b = records_to_csv(run_mse_experiment(cfg, workers=4))
    assert a == b
    assert a.splitlines()[0] == ",".join(CSV_COLUMNS)
    assert len(a.splitlines()) == 1 + 2 * 2 * 2


def test_seed_changes_results():
    a = run_mse_experiment(small_config(base_seed=1), workers=1)
    b = run_mse_experiment(small_config(base_seed=2), workers=1)
    assert a[0].mse != b[0].mse


def test_stderr_shrinks_with_trials():
    few = run_mse_experiment(small_config(trials=100), workers=2)[0]
    many = run_mse_experiment(small_config(trials=1600), workers=2)[0]
    assert few.mse_stderr / many.mse_stderr == pytest.approx(4.0, rel=0.35)


def test_point_mass_start_inflates_bound():
    (rec,) = run_mse_experiment(small_config(methods=["SCE"], initial="point-mass:0"), workers=1)
    assert rec.bound > 0.007 * 1000 / 200


def test_ratio_summary():
    records = run_mse_experiment(small_config(), workers=1)
    (r,) = ratio_summary(records)
    assert r.ratio == pytest.approx(r.mse_mle / r.mse_sce)
    assert r.bound_ratio == pytest.approx(2.5 / 3.5)
    assert ratio_to_csv([r]).startswith("d,eta,n,trials,mse_mle,mse_sce,ratio")


def test_ratio_needs_both_methods():
    records = run_mse_experiment(small_config(methods=["MLE"]), workers=1)
    with pytest.raises(InvalidInput):
        ratio_summary(records)


def test_config_validation(tmp_path):
    with pytest.raises(InvalidInput):
        small_config(eta_values=[1.5])
    with pytest.raises(InvalidInput):
        small_config(methods=["XYZ"])
    with pytest.raises(InvalidInput):
        ExperimentConfig.from_dict({"d_values": [3], "eta_values": [0.5], "n_values": [10],
                                    "trials": 2, "colour": "red"})
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"d_values": [3], "eta_values": [0.5], "n_values": [10],
                                "trials": 2, "methods": ["mle", "sce"]}))
    assert ExperimentConfig.from_json(path).methods == ["MLE", "SCE"]


def test_bad_initial_spec():
    with pytest.raises(InvalidInput):
        run_mse_experiment(small_config(initial="point-mass:9"), workers=1)


def test_matrix_file_source(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("2\n0.7 0.3\n0.2 0.8\n")
    cfg = small_config(d_values=[2], eta_values=[0.25], matrix_source=str(path))
    assert all(math.isfinite(r.mse) for r in run_mse_experiment(cfg, workers=1))


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("MARKOV_XACT_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("MARKOV_XACT_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("MARKOV_XACT_THREADS", "many")
    with pytest.raises(InvalidInput):
        worker_count()


def test_linear_fit_r2():
    x = np.arange(5.0)
    assert linear_fit_r2(x, 2 * x + 1) == pytest.approx(1.0)
    assert linear_fit_r2(x, [0, 1, 0, 1, 0]) < 0.2
