import json
import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path so we can import core modules
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from core.exceptions import ConfigError
from core.pipeline import invert_config, run_forward, run_invert, run_sweep, run_verify
from core.reconstruction import l2_norm
from core.results import read_table
from core.transform import pair_distance
from core.validation import ConfigValidator


def make_config(tmp_path, name="out", **overrides):
    raw = {
        "profile": "flat",
        "n_nodes": 31,
        "n_k": 3,
        "gamma": 1e-4,
        "max_iters": 20,
        "threads": 1,
        "snapshot_every": 5,
        "verify_samples": 3,
        "output_dir": str(tmp_path / name),
    }
    raw.update(overrides)
    return ConfigValidator().validate(raw)


def names(paths):
    return sorted(p.name for p in paths)


class TestForward:
    def test_flat_profile(self, tmp_path):
        outputs = run_forward(make_config(tmp_path))
        assert names(outputs) == [
            "chain_k0.tsv", "chain_k1.tsv", "chain_k2.tsv", "data.tsv", "manifest.json", "profile.tsv",
        ]
        columns, table = read_table(tmp_path / "out" / "data.tsv")
        assert columns == ["k", "g", "g_prime", "v0", "v0_prime"]
        np.testing.assert_allclose(table[:, 1], -0.5, atol=1e-11)
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["command"] == "forward"
        assert manifest["config"]["profile"] == "flat"


class TestInvert:
    def test_flat_profile_is_recovered_exactly(self, tmp_path):
        run = invert_config(make_config(tmp_path))
        np.testing.assert_allclose(run.result.sigma_comp.values, 1.0, atol=1e-12)
        assert run.report.sigma_rel_error < 1e-12
        assert all(h.converged for h in run.result.histories)

    def test_output_files(self, tmp_path):
        outputs = run_invert(make_config(tmp_path, profile="bump", delta=0.01))
        assert names(outputs) == [
            "convergence.tsv", "errors.json", "manifest.json", "sigma.tsv", "sigma_per_k.tsv",
        ]
        columns, table = read_table(tmp_path / "out" / "sigma.tsv")
        assert columns == ["z", "sigma_comp", "sigma_true", "spread", "below_one"]
        assert table.shape == (31, 5)
        _, convergence = read_table(tmp_path / "out" / "convergence.tsv")
        assert convergence.shape == (3 * 21, 6)
        errors = json.loads((tmp_path / "out" / "errors.json").read_text())
        assert len(errors["pair_errors_h2"]) == 3
        assert [n for n, _ in errors["sigma_error_curve"]] == [0, 5, 10, 15, 20]

    def test_reproducible_across_thread_counts(self, tmp_path):
        run_invert(make_config(tmp_path, "serial", profile="bump", delta=0.01, max_iters=10))
        run_invert(make_config(tmp_path, "threaded", profile="bump", delta=0.01, max_iters=10, threads=3))
        for name in ("sigma.tsv", "sigma_per_k.tsv", "convergence.tsv"):
            assert (tmp_path / "serial" / name).read_text() == (tmp_path / "threaded" / name).read_text()

    def test_error_grows_with_noise(self, tmp_path):
        errors = [
            invert_config(make_config(tmp_path, n_k=5, delta=delta, seed=4)).report.sigma_rel_error
            for delta in (0.003, 0.01, 0.03)
        ]
        assert errors[0] < errors[1] < errors[2]

    def test_bump_deviation_is_ordered_by_noise(self, tmp_path):
        def run(delta):
            config = make_config(tmp_path, profile="bump", n_k=5, max_iters=100, delta=delta, seed=4)
            return invert_config(config)

        clean = run(0.0)
        sigma_dev, pair_dev, lift_dev = [], [], []
        for delta in (0.01, 0.03, 0.05):
            noisy = run(delta)
            sigma_dev.append(l2_norm(noisy.result.sigma_comp - clean.result.sigma_comp))
            pair_dev.append(max(
                pair_distance(a, b) for a, b in zip(noisy.result.minimizers, clean.result.minimizers)
            ))
            lift_dev.append(max(noisy.report.lift_distances))
        assert 0.0 < sigma_dev[0] < sigma_dev[1] < sigma_dev[2]
        assert 0.0 < pair_dev[0] < pair_dev[1] < pair_dev[2]
        assert 0.0 < lift_dev[0] < lift_dev[1] < lift_dev[2]

    def test_measured_data(self, tmp_path):
        run_forward(make_config(tmp_path, "forward", profile="bump"))
        data_path = str(tmp_path / "forward" / "data.tsv")
        outputs = run_invert(make_config(tmp_path, data_source=data_path, max_iters=5))
        assert "errors.json" not in names(outputs)
        _, table = read_table(tmp_path / "out" / "sigma.tsv")
        assert np.all(np.isnan(table[:, 2]))

    def test_measured_data_must_match_the_k_grid(self, tmp_path):
        run_forward(make_config(tmp_path, "forward"))
        config = make_config(tmp_path, data_source=str(tmp_path / "forward" / "data.tsv"), n_k=5)
        with pytest.raises(ConfigError, match="k-grid"):
            invert_config(config)


def test_verify(tmp_path):
    config = make_config(tmp_path, profile="bump", verify_lambdas=[1.0, 2.0], carleman_lambdas=[2.0, 4.0])
    outputs = run_verify(config)
    assert names(outputs) == [
        "carleman.tsv", "convexity.tsv", "gradient_check.tsv", "manifest.json", "verify_report.json",
    ]
    report = json.loads((tmp_path / "out" / "verify_report.json").read_text())
    assert report["k"] == 2.0
    assert report["lambda_tested"] == [1.0, 2.0]
    _, carleman = read_table(tmp_path / "out" / "carleman.tsv")
    assert carleman.shape == (6, 6)
    _, convexity = read_table(tmp_path / "out" / "convexity.tsv")
    assert convexity.shape == (6, 5)
    assert set(report["convexity_C1_min"]) == {"1.0", "2.0"}


class TestSweep:
    def test_sweep_over_epsilon(self, tmp_path):
        outputs = run_sweep(make_config(tmp_path, epsilon=[0.1, 0.2]))
        assert names(outputs) == ["manifest.json", "sweep.tsv", "sweep_summary.json"]
        columns, table = read_table(tmp_path / "out" / "sweep.tsv")
        assert columns[:3] == ["epsilon", "lambda", "delta"]
        np.testing.assert_allclose(table[:, 0], [0.1, 0.2])
        summary = json.loads((tmp_path / "out" / "sweep_summary.json").read_text())
        assert summary["points"] == 2
        assert summary["swept"] == ["epsilon"]

    def test_sweep_needs_a_list(self, tmp_path):
        with pytest.raises(ConfigError, match="list-valued"):
            run_sweep(make_config(tmp_path))
