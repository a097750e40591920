import json
import math

import numpy as np
import pytest

from gradpso.core import ConfigError
from gradpso.harness import (
    TRACE_HEADER,
    ExperimentConfig,
    TraceRecord,
    apply_overrides,
    load_config,
    run_experiment,
    summarize,
    write_outputs,
)

SMALL = {
    "objective": "f1_sphere",
    "dim": 3,
    "Np": 6,
    "budget": {"max_evals": 400},
    "strategies": ["standard_pso", "two_phase", {"kind": "four_term", "eta": 0.02}],
    "seeds": [0, 1, 2],
    "trace_stride": 5,
}


class TestSummarize:
    def test_two_values(self):
        s = summarize([1, 3], 10)
        assert s.mean_final == 2 and s.median_final == 2
        assert s.std_final == pytest.approx(math.sqrt(2))

    def test_singleton(self):
        assert summarize([5], 1).std_final == 0.0

    def test_success_rate(self):
        assert summarize([0.1, 0.2, 9.9], 1.0).success_rate == pytest.approx(2 / 3)

    def test_five_runs(self):
        assert summarize([0, 0, 0, 5, 5], 1.0).success_rate == 0.6

    def test_empty(self):
        with pytest.raises(ValueError):
            summarize([], 1.0)

    def test_evals_to_success(self):
        s = summarize([0.0, 0.0, 3.0], 1.0, [100, 300, math.inf])
        assert s.median_evals_to_success == 200
        assert math.isinf(summarize([3.0], 1.0, [math.inf]).median_evals_to_success)
        assert summarize([3.0], 1.0, [math.inf]).to_json()["median_evals_to_success"] is None


class TestConfig:
    def test_defaults(self):
        cfg = ExperimentConfig.from_dict({"objective": "f2_rosenbrock", "dim": 10})
        assert cfg.Np == 30 and cfg.trace_stride == 10
        assert cfg.threshold == pytest.approx(1e-3)

    def test_foxholes_threshold(self):
        assert ExperimentConfig.from_dict({"objective": "f5_foxholes", "dim": 2}).threshold == 0.999

    def test_step_threshold(self):
        assert ExperimentConfig.from_dict({"objective": "f3_step", "dim": 4}).threshold == pytest.approx(-24 + 1e-3)

    @pytest.mark.parametrize(
        "patch",
        [
            {"objective": "f7"},
            {"strategies": ["warp_drive"]},
            {"seeds": []},
            {"seeds": [1, 1]},
            {"trace_stride": 0},
            {"dim": 0},
            {"colour": "red"},
            {"strategies": ["gpso", "gpso"]},
        ],
    )
    def test_errors(self, patch):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({**SMALL, **patch})

    def test_foxholes_dim(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_dict({"objective": "f5_foxholes", "dim": 3})

    def test_labels_disambiguate(self):
        cfg = ExperimentConfig.from_dict({**SMALL, "strategies": ["gpso", {"kind": "gpso", "label": "gpso_short", "inner_pso_iters": 5}]})
        assert [s.name for s in cfg.strategies] == ["gpso", "gpso_short"]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.json")

    def test_bad_json(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(p)


class TestOverrides:
    def test_json_values(self):
        out = apply_overrides(SMALL, ["seeds=[4,5]", "Np=9", "objective=f2_rosenbrock"])
        assert out["seeds"] == [4, 5] and out["Np"] == 9 and out["objective"] == "f2_rosenbrock"
        assert SMALL["seeds"] == [0, 1, 2]

    def test_dotted_budget(self):
        assert apply_overrides(SMALL, ["budget.max_evals=99"])["budget"]["max_evals"] == 99

    @pytest.mark.parametrize("bad", ["colour=red", "budget.speed=1", "novalue", "=3"])
    def test_errors(self, bad):
        with pytest.raises(ConfigError):
            apply_overrides(SMALL, [bad])


class TestRun:
    def test_deterministic(self, tmp_path):
        a = run_experiment(ExperimentConfig.from_dict(SMALL))
        b = run_experiment(ExperimentConfig.from_dict(SMALL))
        assert a == b
        write_outputs(*a, tmp_path / "a")
        write_outputs(*b, tmp_path / "b")
        for name in ("traces.csv", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_trace_contract(self):
        cfg = ExperimentConfig.from_dict(SMALL)
        summaries, traces = run_experiment(cfg)
        assert set(summaries) == {"standard_pso", "two_phase", "four_term"}
        for s in summaries.values():
            assert s.n_runs == 3
        cells = {}
        for r in traces:
            cells.setdefault((r.strategy, r.seed), []).append(r)
        assert len(cells) == 9
        for recs in cells.values():
            evals = [r.evals for r in recs]
            vals = [r.gbest for r in recs]
            assert all(a < b for a, b in zip(evals, evals[1:]))
            assert all(a >= b for a, b in zip(vals, vals[1:]))
            assert evals[-1] <= 400
            assert all(r.iter % 5 == 0 for r in recs[:-1])

    def test_cells_isolated(self):
        full = run_experiment(ExperimentConfig.from_dict(SMALL))[1]
        only = run_experiment(ExperimentConfig.from_dict({**SMALL, "strategies": ["two_phase"]}))[1]
        assert [r for r in full if r.strategy == "two_phase"] == only

    def test_parallel_matches_sequential(self):
        cfg = ExperimentConfig.from_dict(SMALL)
        assert run_experiment(cfg, jobs=2) == run_experiment(cfg, jobs=1)

    def test_local_phase_sentinel(self, tmp_path):
        cfg = ExperimentConfig.from_dict({**SMALL, "strategies": ["two_phase"], "trace_stride": 1})
        summaries, traces = run_experiment(cfg)
        assert any(r.diversity == -1.0 for r in traces)
        write_outputs(summaries, traces, tmp_path)
        rows = (tmp_path / "traces.csv").read_text().splitlines()
        assert any(row.endswith(",-1") for row in rows[1:])


class TestWrite:
    def test_header_only(self, tmp_path):
        write_outputs({}, [], tmp_path)
        assert (tmp_path / "traces.csv").read_text() == ",".join(TRACE_HEADER) + "\n"
        assert TRACE_HEADER == ("strategy", "seed", "iter", "evals", "gbest", "diversity")

    def test_full_precision_and_summary(self, tmp_path):
        rec = TraceRecord("standard_pso", 3, 10, 330, 0.1 + 0.2, 0.123456789012345678)
        write_outputs({"standard_pso": summarize([0.3], 1.0, [330])}, [rec], tmp_path)
        row = (tmp_path / "traces.csv").read_text().splitlines()[1].split(",")
        assert float(row[4]) == 0.1 + 0.2
        assert float(row[5]) == 0.123456789012345678
        data = json.loads((tmp_path / "summary.json").read_text())
        assert set(data["standard_pso"]) == {
            "best_final", "median_final", "mean_final", "std_final",
            "success_rate", "median_evals_to_success", "n_runs",
        }

    def test_io_error_has_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(OSError, match="file"):
            write_outputs({}, [], blocker / "sub")
