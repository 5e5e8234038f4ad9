"""Batch jump-experiment driver: config, determinism, classification."""

import numpy as np
import pytest

import dlqr
from dlqr.errors import InvalidParameterError

from conftest import ANCHORS, K_C, chain_n3a


def tiny_config(**kw):
    defaults = dict(trials=6, box=(-60.0, 60.0), grid=((1.0, 0.5),),
                    methods=("am",), eps_values=(0.0,), seed=3,
                    resolution=40, anchors=ANCHORS, global_anchor="D1")
    defaults.update(kw)
    return dlqr.JumpExperimentConfig(**defaults)


def run_tiny(threads=1, **kw):
    sys, weights, mask = chain_n3a(0.0)
    return dlqr.run_jump_experiment(sys, weights, mask, tiny_config(**kw),
                                    threads=threads)


class TestConfigValidation:
    def test_rejects_zero_trials(self):
        with pytest.raises(InvalidParameterError):
            tiny_config(trials=0)

    def test_rejects_unknown_method(self):
        with pytest.raises(InvalidParameterError):
            tiny_config(methods=("gd",))

    def test_rejects_empty_grid(self):
        with pytest.raises(InvalidParameterError):
            tiny_config(grid=())

    def test_rejects_zero_volume_box(self):
        with pytest.raises(InvalidParameterError):
            tiny_config(box=(5.0, 5.0))

    def test_rejects_bad_armijo_pair(self):
        with pytest.raises(InvalidParameterError):
            tiny_config(grid=((1.0, 1.5),))

    def test_cells_enumerate_in_order(self):
        cfg = tiny_config(grid=((1.0, 0.5), (5.0, 0.9)), methods=("am", "newton"))
        cells = cfg.cells()
        assert len(cells) == 4
        assert cells[0]["method"] == "am" and cells[0]["s_bar"] == 1.0
        assert cells[-1]["method"] == "newton" and cells[-1]["s_bar"] == 5.0


class TestTrivialRuns:
    def test_single_trial_from_global_optimum(self):
        """Box pinched around K_c: start = end = global component, no jumps."""
        sys, weights, mask = chain_n3a(0.0)
        kc = np.diag(K_C)
        box = np.column_stack((kc - 1e-6, kc + 1e-6))
        cfg = dlqr.JumpExperimentConfig(
            trials=1, box=box, grid=((1.0, 0.5),), methods=("am",),
            eps_values=(0.0,), seed=0, resolution=4, anchors={"D1": K_C},
            global_anchor="D1")
        rep = dlqr.run_jump_experiment(sys, weights, mask, cfg)
        row = rep.rows[0]
        glab = rep.anchor_labels[0]["D1"]
        assert row["start_component"] == glab
        assert row["end_component"] == glab
        assert row["n_jumps"] == 0
        assert row["status"] == "converged"
        assert row["final_J"] <= 1e-9

    def test_eps_values_require_factory(self):
        sys, weights, mask = chain_n3a(0.0)
        cfg = tiny_config(eps_values=(0.0, 0.05))
        with pytest.raises(InvalidParameterError):
            dlqr.run_jump_experiment(sys, weights, mask, cfg)

    def test_factory_requires_numeric_eps(self):
        _, weights, mask = chain_n3a(0.0)
        factory = lambda eps: chain_n3a(eps)[0]
        cfg = tiny_config(eps_values=(None,))
        with pytest.raises(InvalidParameterError):
            dlqr.run_jump_experiment(factory, weights, mask, cfg)


class TestReportShape:
    def test_rows_cover_all_cells_and_trials(self):
        rep = run_tiny(trials=5, grid=((1.0, 0.5), (5.0, 0.9)))
        assert len(rep.rows) == 5 * 2
        trials_seen = {(r["trial"], r["s_bar"]) for r in rep.rows}
        assert len(trials_seen) == 10

    def test_csv_shape_and_columns(self):
        rep = run_tiny(trials=4)
        header = rep.csv_header()
        assert header[:2] == ["trial", "seed"]
        assert header[2:5] == ["k0_0", "k0_1", "k0_2"]
        assert header[5:] == ["start_component", "method", "s_bar", "beta",
                              "final_J", "end_component", "n_iters", "status",
                              "n_jumps", "eps"]
        rows = rep.to_csv_rows()
        assert len(rows) == 4
        assert all(len(r) == len(header) for r in rows)

    def test_summary_text_mentions_each_start(self):
        rep = run_tiny(trials=8)
        text = rep.summary_text()
        assert "D2" in text and "D3" in text
        assert "seed: 3" in text

    def test_json_dict_round_shape(self):
        rep = run_tiny(trials=4)
        doc = rep.to_json_dict()
        assert doc["format"] == "dlqr-jump-report-1"
        assert doc["trials"] == 4
        assert len(doc["cells"]) == 1
        cell = doc["cells"][0]
        assert set(cell) >= {"eps", "method", "s_bar", "beta", "to_global",
                             "started", "statuses"}

    def test_to_global_filters(self):
        rep = run_tiny(trials=6, grid=((1.0, 0.5), (5.0, 0.9)))
        total = rep.to_global("D2")
        parts = (rep.to_global("D2", s_bar=1.0, beta=0.5)
                 + rep.to_global("D2", s_bar=5.0, beta=0.9))
        assert total == parts


class TestDeterminismAndClassification:
    def test_threads_match_serial_exactly(self):
        a = run_tiny(trials=10, threads=1)
        b = run_tiny(trials=10, threads=4)
        assert a.to_csv_rows() == b.to_csv_rows()
        assert a.to_json_dict() == b.to_json_dict()

    def test_repeat_runs_identical(self):
        a = run_tiny(trials=6)
        b = run_tiny(trials=6)
        assert a.to_csv_rows() == b.to_csv_rows()

    def test_converged_trials_classify_to_known_minima(self):
        """Final labels of converged trials match the local solution they
        reached (within an atlas cell diagonal)."""
        sys, weights, mask = chain_n3a(0.0)
        cfg = tiny_config(trials=12, resolution=60)
        rep = dlqr.run_jump_experiment(sys, weights, mask, cfg)
        atlas = dlqr.build_atlas(sys, mask, cfg.box, cfg.resolution)
        minima = {
            dlqr.classify(atlas, K_C, sys=sys): np.diag(K_C),
            dlqr.classify(atlas, np.diag([6.056, -3.161, -0.635]), sys=sys):
                np.array([6.056, -3.161, -0.635]),
            dlqr.classify(atlas, np.diag([6.484, 6.460, 3.024]), sys=sys):
                np.array([6.484, 6.460, 3.024]),
        }
        checked = 0
        for row in rep.rows:
            if row["status"] != "converged":
                continue
            rec = dlqr.solve_projection_method(
                sys, weights, mask, np.diag(row["k0"]), method=row["method"],
                armijo=dlqr.ArmijoParams(s_bar=row["s_bar"], beta=row["beta"]))
            x = np.diag(rec.final_K)
            assert row["end_component"] in minima
            assert np.linalg.norm(x - minima[row["end_component"]]) \
                < atlas.cell_diagonal
            checked += 1
        assert checked >= 8

    def test_sampling_failure_recorded_not_raised(self):
        """A sampler box with no stable points yields failure rows, not an
        exception."""
        sys, weights, mask = chain_n3a(0.05)
        box = (-1e-3, 1e-3)  # hugs the unstable zero gain at eps=0.05
        cfg = dlqr.JumpExperimentConfig(
            trials=2, box=box, grid=((1.0, 0.5),), methods=("am",),
            eps_values=(0.05,), seed=0, resolution=4, anchors=None,
            global_anchor="D1", max_rejects=64)
        rep = dlqr.run_jump_experiment(sys, weights, mask, cfg)
        assert len(rep.rows) == 2
        assert all(r["status"] == "sampling-failure" for r in rep.rows)
