import csv
import math

import numpy as np
import pytest

from dmolab.cli import main, parse_seeds
from dmolab.core import ContractError
from dmolab.harness import (
    ExperimentConfig,
    TraceRow,
    emit_plot_data,
    median_iqr,
    read_trace,
    run_experiment,
    run_single,
    summarize,
    write_summary,
)
from dmolab.problems import PFCache

# small but complete: the full eq10 schedule with a short warmup
FAST = dict(problem="F2", n_pop=12, tau_t=5, warmup_gens=10, ref_size=50, hv_samples=2000)


def row(algorithm="dtaea", seed=1, time_step=1, generation=0, igd=0.5, hv=0.5, problem="F2", tau=5):
    return TraceRow(f"{algorithm}-{problem}-tau{tau}-s{seed}", algorithm, problem, tau, seed,
                    time_step, generation, 3, igd, hv, 0.0)


@pytest.fixture
def cache(tmp_path):
    return PFCache(tmp_path / "pf")


class TestConfig:
    def test_defaults(self):
        c = ExperimentConfig()
        assert c.warmup_gens == 300 and c.ref_size == 1000

    @pytest.mark.parametrize(
        "kwargs", [{"algorithm": "moead-kf"}, {"problem": "F7"}, {"tau_t": 0}, {"seeds": []}]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ContractError):
            ExperimentConfig(**kwargs)

    def test_unknown_keys(self):
        with pytest.raises(ContractError):
            ExperimentConfig.from_mapping({"populaton": 10})

    def test_schedule_length(self):
        s = ExperimentConfig(tau_t=25).make_schedule()
        assert s.total_generations == 525


class TestRunSingle:
    def test_one_row_per_time_step_and_change_hooks(self, cache):
        hooks = []
        rows = run_single(ExperimentConfig(algorithm="nsga2", **FAST), 3, cache, hooks)
        assert [r.time_step for r in rows] == list(range(1, 11))
        assert [r.m for r in rows] == [3, 4, 5, 6, 7, 6, 5, 4, 3, 2]
        assert [r.generation for r in rows] == [9 + 5 * k for k in range(10)]
        assert [k for _, k in hooks] == ["change"] * 9
        assert all(r.igd > 0 and 0 <= r.hv_norm <= 1 for r in rows)

    def test_drifting_problem_fires_drift_hooks(self, cache):
        hooks = []
        cfg = ExperimentConfig(algorithm="dtaea", schedule="custom", custom_schedule=[3, 2],
                               record_hv=False, **{**FAST, "problem": "F5"})
        rows = run_single(cfg, 1, cache, hooks)
        kinds = [k for _, k in hooks]
        # the drift bucket turns over at generations 5 and 10; the change at 10 covers both
        assert kinds == ["drift", "change"] and [g for g, _ in hooks] == [5, 10]
        assert all(math.isnan(r.hv_norm) for r in rows)

    def test_per_generation_logging(self, cache):
        cfg = ExperimentConfig(algorithm="moead", per_generation=True, schedule="custom",
                               custom_schedule=[2, 3], **FAST)
        rows = run_single(cfg, 2, cache)
        assert [r.generation for r in rows] == list(range(15))
        assert sum(not math.isnan(r.hv_norm) for r in rows) == 2

    @pytest.mark.parametrize("algorithm", ["dtaea-v3", "dnsga2"])
    def test_same_seed_same_rows(self, cache, algorithm):
        cfg = ExperimentConfig(algorithm=algorithm, schedule="eq13", **FAST)
        assert run_single(cfg, 4, cache) == run_single(cfg, 4, cache)


class TestPersistence:
    def test_trace_round_trip(self, tmp_path, cache):
        cfg = ExperimentConfig(algorithm="dtaea", schedule="eq13", seeds=[1, 2], out_path=str(tmp_path), **FAST)
        rows = run_experiment(cfg, cache)
        files = list(tmp_path.glob("trace_*.csv"))
        assert len(files) == 1 and len(rows) == 12
        assert read_trace(files[0]) == rows
        header = files[0].read_text().splitlines()[0]
        assert header == "run_id,algorithm,problem,tau_t,seed,time_step,generation,m,igd,hv_norm,wall_ms"

    def test_unwritable_output(self, tmp_path, cache):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        cfg = ExperimentConfig(out_path=str(blocker / "sub"), **FAST)
        with pytest.raises(OSError):
            run_experiment(cfg, cache)


class TestSummaries:
    def test_quartile_rule(self):
        assert median_iqr([1.0, 2.0, 3.0]) == (2.0, 1.0)
        assert median_iqr([0.7]) == (0.7, 0.0)

    def test_summary_of_three_runs(self, tmp_path):
        rows = [row(seed=s, igd=float(s), hv=0.1 * s) for s in (1, 2, 3)]
        rows += [row("nsga2", seed=s, igd=10.0 + s, hv=0.0) for s in (1, 2, 3)]
        table = {r["algorithm"]: r for r in summarize(rows)}
        d = table["dtaea"]
        assert (d["runs"], d["migd_median"], d["migd_iqr"]) == (3, 2.0, 1.0)
        assert d["mhv_median"] == pytest.approx(0.2)
        assert d["mean_rank_igd"] == 1.0 and table["nsga2"]["mean_rank_igd"] == 2.0
        assert d["mean_rank_hv"] == 1.0
        out = tmp_path / "summary.csv"
        write_summary(list(table.values()), out)
        lines = out.read_text().splitlines()
        assert lines[0] == "# quantile_method=linear" and lines[1].startswith("algorithm,problem")

    def test_summary_uses_last_row_of_each_step(self):
        rows = [row(generation=0, igd=9.0), row(generation=4, igd=1.0), row(time_step=2, generation=9, igd=3.0)]
        assert summarize([rows])[0]["migd_median"] == 2.0

    def test_plot_data(self, tmp_path):
        rows = [row(algo, seed=s, generation=g, igd=float(s + g))
                for algo in ("dtaea", "nsga2") for s in (1, 2, 3) for g in range(4)]
        rows += [row(seed=1, tau=10, generation=0)]
        paths = emit_plot_data(rows, tmp_path)
        assert [p.name for p in paths] == ["igd_F2_tau5.csv", "igd_F2_tau10.csv"]
        with open(tmp_path / "igd_F2_tau5.csv") as fh:
            data = list(csv.DictReader(fh))
        assert len(data) == 8
        assert data[0] == {"generation": "0", "algorithm": "dtaea", "median_igd": "2.0"}


class TestCLI:
    def test_parse_seeds(self):
        assert parse_seeds("1..3,7") == [1, 2, 3, 7]
        assert parse_seeds("5") == [5]

    def test_weights(self, tmp_path, capsys):
        out = tmp_path / "w.csv"
        assert main(["weights", "--m", "5", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "w1,w2,w3,w4,w5" and len(lines) == 281
        assert main(["weights", "--m", "9"]) == 2

    def test_run_summarize_plot(self, tmp_path, capsys):
        cfg = tmp_path / "exp.yaml"
        cfg.write_text("problem: F2\nalgorithm: nsga2\nn_pop: 8\nwarmup_gens: 4\nref_size: 30\nseeds: 1..2\n")
        code = main(["run", "--config", str(cfg), "--tau", "2", "--schedule", "eq13",
                     "--out", str(tmp_path), "--no-hv", "--per-generation"])
        assert code == 0
        trace = capsys.readouterr().out.strip()
        rows = read_trace(trace)
        assert {r.seed for r in rows} == {1, 2} and rows[0].tau_t == 2
        assert main(["summarize", trace]) == 0
        assert capsys.readouterr().out.startswith("# quantile_method=linear")
        assert main(["plot-data", trace, "--out", str(tmp_path / "plots")]) == 0
        assert (tmp_path / "plots" / "igd_F2_tau2.csv").exists()

    def test_bad_config_exit_code(self, capsys):
        assert main(["run", "--algo", "nope", "--seeds", "1"]) == 2
        assert "unknown algorithm" in capsys.readouterr().err

    def test_missing_trace_exit_code(self, tmp_path):
        assert main(["summarize", str(tmp_path / "missing.csv")]) == 3


def test_seeded_runs_differ_across_seeds(cache):
    cfg = ExperimentConfig(algorithm="nsga2", schedule="eq13", **FAST)
    a = [r.igd for r in run_single(cfg, 1, cache)]
    b = [r.igd for r in run_single(cfg, 2, cache)]
    assert not np.array_equal(a, b)
