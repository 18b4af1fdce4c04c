import json
import math
import os

import numpy as np
import pytest

import ufslab

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "..", "configs")


def test_suppression_curve_points():
    s = ufslab.compute_suppression(np.array([0.3, 1.2, 0.75]), alpha=0.5, beta=1.0, epsilon=1.5)
    assert s.tolist() == [1.0, 0.5, 0.75]
    assert ufslab.compute_suppression(np.array([2.0]), 0.0, 1.0, 1.0).tolist() == [0.0]


def test_ratio_and_masked_score():
    r = ufslab.compute_ratio(np.array([2.0]), np.array([1.0]), np.array([[0.5]]))
    assert r[0, 0] == pytest.approx(1.5)
    y = np.array([[1.0, 2.0], [3.0, -1.0]])
    w = np.array([0.5, 2.0])
    out = ufslab.apply_suppression(y, np.ones_like(y), w, 0.25)
    np.testing.assert_allclose(out, y @ w + 0.25)
    assert ufslab.apply_suppression(y, np.zeros_like(y), w, 0.25).tolist() == [0.25, 0.25]


def test_regimes():
    assert ufslab.classify_mode(0, 1, 1)["regime"] == "dismission"
    report = ufslab.classify_mode(1, 2, 3)
    assert report["regime"] == "suppression"
    assert report["no_effective_suppression"]
    with pytest.raises(ufslab.ContractError):
        ufslab.classify_mode(2, 1, 3)


def test_selection():
    assert ufslab.select_indices([0.9, -0.2, 0.5], 2, "top") == [0, 2]
    rng = np.random.default_rng(0)
    data = rng.normal(size=(40, 2))
    data[7] = [1e6, -1e6]
    kept = ufslab.instance_select(data, 0.5)
    assert len(kept) == 20 and 7 not in kept


def test_metrics():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(200, 2))
    assert ufslab.frechet_distance(a, a) == pytest.approx(0.0, abs=1e-10)
    m = ufslab.manifold_metrics(a, a, k=1)
    assert m["precision"] == m["recall"] == m["coverage"] == 1.0
    centers = np.array([[2.0 * math.cos(k * math.pi / 4), 2.0 * math.sin(k * math.pi / 4)] for k in range(8)])
    assert ufslab.mode_coverage(centers, centers, 0.02) == (8, 1.0)
    emb = ufslab.random_feature_embed(np.zeros((2, 1, 8, 8)), seed=3)
    assert emb.shape == (2, 64) and not emb.any()


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        ufslab.apply_suppression(np.ones((2, 2)), np.ones((2, 3)), np.ones(2), 0.0)
    with pytest.raises(OSError):
        ufslab.read_checkpoint("/nonexistent/checkpoint.ufsl")


def test_tiny_run(tmp_path):
    out = tmp_path / "run"
    summary = ufslab.run_experiment(
        os.path.join(CONFIG_DIR, "ring8_topk_ufs.json"),
        [
            "train.iterations=2",
            "train.batch_size=16",
            "selection.k_start=16",
            "selection.k_end=8",
            "eval.cadence=1",
            "eval.samples=64",
            "eval.dump_samples=8",
            f"output_dir={out}",
        ],
    )
    assert summary["exit_status"] == 0
    assert [r["iteration"] for r in summary["rows"]] == [0, 1, 2]
    with open(out / "metrics.csv") as f:
        assert f.readline().strip() == ufslab.METRICS_HEADER
    ckpt = ufslab.read_checkpoint(str(out / "checkpoint.ufsl"))
    assert ckpt["stats/initialized"][0] == 1.0
    assert int(ckpt["state/iteration"][0]) == 2
    with open(out / "summary.json") as f:
        assert json.load(f)["iterations"] == 2
