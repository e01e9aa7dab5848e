import json
import subprocess
import sys

import numpy as np
import pytest

from mmsg.cli import main
from mmsg.model import read_matrix

SIM = ["simulate", "--n", "40", "--p", "15", "--k", "3", "--n-pure", "12", "--c-delta", "10"]


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_simulate_minimal(tmp_path):
    assert main(["simulate", "--n", "10", "--p", "5", "--k", "2", "--n-pure", "2", "--out", str(tmp_path)]) == 0
    assert set(_files(tmp_path)) == {"x.csv", "theta.csv", "pi.csv", "manifest.json"}
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["seed"] == 0xC0FFEE and manifest["delta"] > 0


def test_simulate_deterministic(tmp_path):
    assert main(SIM + ["--out", str(tmp_path / "a"), "--seed", "7"]) == 0
    assert main(SIM + ["--out", str(tmp_path / "b"), "--seed", "7"]) == 0
    assert _files(tmp_path / "a") == _files(tmp_path / "b")


def test_simulate_from_config(tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"n": 10, "p": 5, "K": 2, "n_pure": 2, "scenario": "she", "seed": 3}))
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    manifest = json.loads((tmp_path / "o" / "manifest.json").read_text())
    assert manifest["scenario"] == "she" and manifest["seed"] == 3


def test_simulate_too_few_pure(tmp_path, capsys):
    code = main(["simulate", "--n", "5", "--p", "4", "--k", "2", "--n-pure", "1", "--out", str(tmp_path)])
    assert code == 3
    assert "pure" in capsys.readouterr().err


def test_estimate_roundtrip(tmp_path, capsys):
    sim = tmp_path / "sim"
    main(SIM + ["--out", str(sim)])
    assert main(["estimate", "--input", str(sim), "--method", "both", "--out", str(tmp_path / "est")]) == 0
    report = json.loads((tmp_path / "est" / "estimate.json").read_text())
    assert all(1 <= i <= 40 for i in report["spg"]["vertex_indices"])
    assert "aligned_l1_error" in report["spg"] and "aligned_l1_error" in report["wsc"]
    pi_hat = read_matrix(tmp_path / "est" / "pi_hat_spg.csv")
    np.testing.assert_allclose(pi_hat.sum(axis=1), 1.0, atol=1e-12)
    one_hot = read_matrix(tmp_path / "est" / "pi_hat_wsc.csv")
    assert set(np.unique(one_hot)) <= {0.0, 1.0}
    np.testing.assert_array_equal(one_hot.sum(axis=1), 1.0)
    assert "aligned l1 error" in capsys.readouterr().out


def test_estimate_bare_matrix_needs_k(tmp_path):
    sim = tmp_path / "sim"
    main(SIM + ["--out", str(sim)])
    assert main(["estimate", "--input", str(sim / "x.csv"), "--out", str(tmp_path)]) == 3
    assert main(["estimate", "--input", str(sim / "x.csv"), "--k", "3", "--out", str(tmp_path / "e")]) == 0


def test_estimate_k_too_large(tmp_path):
    sim = tmp_path / "sim"
    main(SIM + ["--out", str(sim)])
    assert main(["estimate", "--input", str(sim / "x.csv"), "--k", "16", "--out", str(tmp_path)]) == 3


def test_estimate_missing_input_is_io_error(tmp_path):
    assert main(["estimate", "--input", str(tmp_path / "nope.csv"), "--k", "2", "--out", str(tmp_path)]) == 4


def test_estimate_malformed_matrix(tmp_path):
    bad = tmp_path / "x.csv"
    bad.write_text("1,2\n3\n")
    assert main(["estimate", "--input", str(bad), "--k", "1", "--out", str(tmp_path)]) == 5


def test_estimate_deterministic(tmp_path):
    sim = tmp_path / "sim"
    main(SIM + ["--out", str(sim)])
    for d in ("a", "b"):
        main(["estimate", "--input", str(sim), "--method", "both", "--out", str(tmp_path / d)])
    assert _files(tmp_path / "a") == _files(tmp_path / "b")


def test_diagnose(tmp_path):
    sim = tmp_path / "sim"
    main(SIM + ["--out", str(sim)])
    assert main(["diagnose", "--input", str(sim), "--out", str(tmp_path / "d")]) == 0
    report = json.loads((tmp_path / "d" / "diagnostics.json").read_text())
    assert all(report["lemmas"].values())
    assert "sep_first" in report["condition_ratios"]


def test_experiment_custom_config(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"experiment_id": "custom", "replicates": 2, "scenarios": ["ghe"],
                               "cells": [{"n": 50, "p": 20, "k": 2, "sweep": "n", "sweep_value": 50}]}))
    out = tmp_path / "out"
    assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
    first = _files(out)
    assert set(first) == {"custom.csv", "custom.svg"}
    assert main(["experiment", "--config", str(cfg), "--out", str(out)]) == 0
    assert _files(out) == first


def test_experiment_builtin_restricted(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"grid": {"values": [10], "settings": ["n=200,p=2000"]}}))
    args = ["experiment", "--id", "exp2", "--config", str(cfg), "--replicates", "2", "--scenario", "she",
            "--method", "spg", "--out", str(tmp_path)]
    assert main(args) == 0
    lines = (tmp_path / "exp2.csv").read_text().splitlines()
    assert len(lines) == 2 and ",she," in lines[1] and ",spg," in lines[1]


def test_experiment_empty_grid_succeeds(tmp_path, capsys):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"grid": {"values": [12345]}}))
    assert main(["experiment", "--id", "exp2", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert "empty grid" in capsys.readouterr().out


def test_experiment_bad_config(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text("{not json")
    assert main(["experiment", "--id", "exp1", "--config", str(cfg), "--out", str(tmp_path)]) == 3


def test_threads_env_validated(tmp_path, monkeypatch):
    monkeypatch.setenv("MMSG_THREADS", "many")
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"experiment_id": "custom", "replicates": 1, "cells": [{"n": 30, "p": 10, "k": 2}]}))
    assert main(["experiment", "--config", str(cfg), "--out", str(tmp_path)]) == 3


def test_seed_accepts_hex_and_rejects_negative(tmp_path):
    assert main(SIM + ["--seed", "0xC0FFEE", "--out", str(tmp_path)]) == 0
    with pytest.raises(SystemExit) as exc:
        main(SIM + ["--seed", "-1", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_realdata_iris(data_dir, tmp_path):
    assert main(["realdata", "--dataset", "iris", "--data-dir", str(data_dir), "--out", str(tmp_path)]) == 0
    stats = json.loads((tmp_path / "iris_stats.json").read_text())
    assert stats["tau_pure"] == pytest.approx(0.2467, abs=0.03)
    assert stats["tau_mixed"] == pytest.approx(0.06, abs=0.03)
    assert stats["kappa_pi_hat"] == pytest.approx(7.6167, rel=0.1)
    assert stats["standardize"] is False
    assert (tmp_path / "iris_ternary.csv").exists() and (tmp_path / "iris_ternary.svg").exists()


def test_realdata_dermatology_stats_only(data_dir, tmp_path):
    args = ["realdata", "--dataset", "dermatology", "--data-dir", str(data_dir), "--standardize",
            "--out", str(tmp_path)]
    assert main(args) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["dermatology_stats.json"]


def test_realdata_deterministic(data_dir, tmp_path):
    for d in ("a", "b"):
        main(["realdata", "--dataset", "all", "--data-dir", str(data_dir), "--out", str(tmp_path / d)])
    assert _files(tmp_path / "a") == _files(tmp_path / "b")


def test_realdata_missing_file(tmp_path):
    assert main(["realdata", "--dataset", "wine", "--data-dir", str(tmp_path), "--out", str(tmp_path)]) == 4


def test_console_script_runs(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "mmsg.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("simulate", "estimate", "diagnose", "experiment", "realdata"):
        assert sub in proc.stdout
