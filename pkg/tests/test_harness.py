import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import fields, replace

import numpy as np
import pytest

from qrbackward import harness, problems
from qrbackward.harness import (
    CSV_COLUMNS,
    SEED_ENV,
    ConfigError,
    ErrorReport,
    ExperimentConfig,
    ExperimentError,
    emit,
    error_metric,
    load_config,
    run_epsilon,
    run_experiment,
    run_sample,
)
from qrbackward.params import RegParams
from qrbackward.solver import DivergenceError, SchemeConfig, Trajectory
from qrbackward.spectral import Grid1D, Interval

PI = math.pi


def small(**kw):
    base = dict(case="test1", epsilons=(1e-3,), samples=4, K=20)
    return ExperimentConfig(**{**base, **kw})


def _traj(grid, u, v):
    cfg = SchemeConfig(grid, 1)
    return Trajectory(np.vstack([u, u]), np.vstack([v, v]), cfg)


class TestErrorMetric:
    def test_exact_is_zero(self, unit_grid):
        case = problems.test1()
        u, v = case.u_exact(unit_grid.x, 0.0), case.v_exact(unit_grid.x, 0.0) * np.ones(16)
        assert error_metric(_traj(unit_grid, u, v), 0, case, unit_grid) == (0.0, 0.0)

    def test_offset(self, unit_grid):
        case = problems.test1()
        u = case.u_exact(unit_grid.x, 0.0) + 0.1
        v = np.full(16, 0.1)
        eu, ev = error_metric(_traj(unit_grid, u, v), 1, case, unit_grid)
        assert eu == pytest.approx(0.01, rel=1e-13)
        assert ev == pytest.approx(0.01, rel=1e-13)

    def test_zero_field_against_sine(self, unit_grid):
        case = problems.test1()
        eu, _ = error_metric(_traj(unit_grid, np.zeros(16), np.zeros(16)), 0, case, unit_grid)
        oracle = sum(math.sin(m * PI / 15) ** 2 for m in range(1, 16)) / 15
        assert eu == pytest.approx(oracle, rel=1e-14)
        assert eu == pytest.approx(0.5, rel=1e-14)

    def test_rejects_level(self, unit_grid):
        with pytest.raises(ValueError):
            error_metric(_traj(unit_grid, np.zeros(16), np.zeros(16)), 2, problems.test1(), unit_grid)


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig.from_dict({"case": "test2"})
        assert (cfg.M, cfg.K, cfg.samples, cfg.theta, cfg.p) == (15, 100, 100, 0.3, 1.0)
        assert cfg.epsilons == (1e-3, 1e-4, 1e-5)

    @pytest.mark.parametrize("data, path", [
        ({}, ""),
        ({"case": "test3"}, "case"),
        ({"case": "test1", "M": 1}, "M"),
        ({"case": "test1", "epsilons": [0.5, 2.0]}, "epsilons/1"),
        ({"case": "test1", "output": {"colour": "red"}}, "output"),
        ({"case": "test1", "bogus": 1}, ""),
    ])
    def test_schema_errors(self, data, path):
        with pytest.raises(ConfigError) as info:
            ExperimentConfig.from_dict(data)
        assert info.value.path == path

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv(SEED_ENV, "77")
        assert ExperimentConfig.from_dict({"case": "test1", "base_seed": 3}).base_seed == 77
        monkeypatch.setenv(SEED_ENV, "seven")
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"case": "test1"})

    def test_load(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"case": "test1", "samples": 3, "output": {"directory": "x", "plots": True}}))
        cfg = load_config(path)
        assert (cfg.samples, cfg.output_dir, cfg.plots) == (3, "x", True)
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.json")
        (tmp_path / "bad.json").write_text("{")
        with pytest.raises(ConfigError):
            load_config(tmp_path / "bad.json")


class TestSamples:
    def test_deterministic(self):
        cfg = small()
        assert run_sample(cfg, 1e-3, 2) == run_sample(cfg, 1e-3, 2)
        assert run_sample(cfg, 1e-3, 2) != run_sample(cfg, 1e-3, 3)

    def test_exact_terminal_finite(self):
        res = run_sample(small(K=100), 1e-3, 0, exact_terminal=True)
        assert math.isfinite(res.err_u) and math.isfinite(res.err_v)

    def test_single_sample_band(self):
        res = run_sample(ExperimentConfig(case="test1"), 1e-4, 0)
        assert 0.0006 <= res.err_u <= 0.06

    def test_divergence_recorded(self, monkeypatch):
        def boom(*a, **k):
            raise DivergenceError(5)

        monkeypatch.setattr(harness, "solve_backward", boom)
        res = run_sample(small(), 1e-3, 0)
        assert res.excluded and math.isnan(res.err_u)
        with pytest.raises(ExperimentError):
            run_epsilon(small(), 1e-3)


class TestAggregation:
    def test_single_sample_report(self):
        cfg = small(samples=1)
        res = run_experiment(cfg).results[0]
        one = run_sample(cfg, 1e-3, 0)
        assert (res.mean_u, res.mean_v) == (one.err_u, one.err_v)

    def test_mean_exact(self):
        res = run_epsilon(small(samples=6), 1e-3)
        assert res.mean_u == pytest.approx(float(np.mean(res.err_u)), rel=1e-14)
        assert res.mean_v == pytest.approx(float(np.mean(res.err_v)), rel=1e-14)

    def test_order_independent(self):
        cfg = small(samples=6, workers=3)
        serial = run_epsilon(replace(cfg, workers=1), 1e-3)
        with ThreadPoolExecutor(3) as ex:
            parallel = run_epsilon(cfg, 1e-3, ex)
        assert serial.mean_u == parallel.mean_u and serial.mean_v == parallel.mean_v
        np.testing.assert_array_equal(serial.err_u, parallel.err_u)

    def test_excluded_below_threshold(self, monkeypatch):
        real = harness.solve_backward
        calls = {"n": 0}

        def flaky(*a, **k):
            calls["n"] += 1
            if calls["n"] == 1:
                raise DivergenceError(3)
            return real(*a, **k)

        monkeypatch.setattr(harness, "solve_backward", flaky)
        res = run_epsilon(small(samples=10), 1e-3)
        assert res.excluded == [0]
        assert res.mean_u == pytest.approx(float(np.mean(res.err_u[1:])), rel=1e-14)


class TestEmit:
    def test_round_trip(self, tmp_path):
        cfg = small(samples=2, epsilons=(1e-3, 1e-4))
        report = run_experiment(cfg)
        paths = emit(report, tmp_path)
        with open(tmp_path / "errors.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == CSV_COLUMNS
        assert len(rows) == 1 + 4
        summary = json.loads((tmp_path / "summary.json").read_text())
        for res, js in zip(report.results, summary["results"]):
            assert js["mean_err_u"] == res.mean_u and js["mean_err_v"] == res.mean_v
            for f in fields(RegParams):
                assert f.name in js["params"]
            assert js["predicted_rate"] > 0
        assert [float(r[6]) for r in rows[1:3]] == list(report.results[0].err_u)
        assert len(paths) == 2

    def test_empty(self, tmp_path):
        report = ErrorReport(small(epsilons=()), [])
        emit(report, tmp_path)
        assert (tmp_path / "errors.csv").read_text().strip() == ",".join(CSV_COLUMNS)
        assert json.loads((tmp_path / "summary.json").read_text())["results"] == []

    def test_plots(self, tmp_path):
        pytest.importorskip("matplotlib")
        report = run_experiment(small(samples=2, epsilons=(1e-3, 1e-4)))
        paths = emit(report, tmp_path, plots=True)
        svgs = [p for p in paths if p.suffix == ".svg"]
        assert len(svgs) == 2
        assert all(p.read_text().lstrip().startswith("<?xml") for p in svgs)

    def test_io_error_has_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError, match="file"):
            emit(ErrorReport(small(), []), blocker / "sub")
