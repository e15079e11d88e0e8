import numpy as np
import pytest

from potdc import cli
from potdc.errors import ConfigError
from potdc.experiments import (CSV_COLUMNS, ExperimentConfig, TrialRecord,
                               example1_config, example2_config,
                               example3_config, load_config, mean_by,
                               run_experiment, write_csv, write_sinr_svg,
                               _trial_seed)
from potdc.arraymodel import (GaussianDensity, TruncatedLaplacianDensity,
                              UniformDensity)


SMALL = dict(array_sizes=(6,), num_trials=2, snr_db=(0.0, 10.0))


@pytest.fixture(scope="module")
def small_records():
    return run_experiment(example1_config(**SMALL))


class TestConfig:
    def test_defaults(self):
        cfg = example1_config()
        assert cfg.num_trials == 100
        assert cfg.snr_db == tuple(range(-10, 31, 5))
        assert cfg.gamma == 10.0 and cfg.eta_scale == 0.3
        assert isinstance(cfg.desired_density, GaussianDensity)
        assert isinstance(cfg.interference_density, UniformDensity)

    def test_example2_density(self):
        cfg = example2_config()
        assert isinstance(cfg.desired_density, TruncatedLaplacianDensity)

    def test_example3_shape(self):
        cfg = example3_config()
        assert cfg.array_sizes == tuple(range(8, 21, 2))
        assert cfg.snr_db == (-10.0,)
        assert cfg.num_trials == 200
        assert cfg.alpha0_rule == "random"
        assert cfg.record_timing
        assert set(cfg.methods) == {"potdc", "dc"}

    @pytest.mark.parametrize("bad", [
        dict(num_trials=0), dict(snapshots=0), dict(snr_db=()),
        dict(array_sizes=(1,)), dict(gamma=0.0), dict(zeta_term=0.0),
        dict(lower_bound_sectors=0), dict(alpha0_rule="weird"),
        dict(methods=("potdc", "nope")),
    ])
    def test_validation(self, bad):
        with pytest.raises(ConfigError):
            ExperimentConfig(**bad)

    def test_load_config_roundtrip(self, tmp_path):
        path = tmp_path / "study.ini"
        path.write_text("""
[experiment]
example = example2
num_trials = 7
snr_db = -5 0 5
array_sizes = 8
master_seed = 42

[robust]
gamma = 12.5
eta_rule = actual
alpha0_rule = random

[desired]
kind = laplacian
center_deg = 28
scale = 0.2

[interference]
kind = uniform
center_deg = 12
width_deg = 6
""")
        cfg = load_config(path)
        assert cfg.example == "example2"
        assert cfg.num_trials == 7
        assert cfg.snr_db == (-5.0, 0.0, 5.0)
        assert cfg.master_seed == 42
        assert cfg.gamma == 12.5
        assert cfg.eta_rule == "actual"
        assert cfg.alpha0_rule == "random"
        assert cfg.desired_density == TruncatedLaplacianDensity(28.0, 0.2)
        assert cfg.interference_density == UniformDensity(12.0, 6.0)

    def test_load_config_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.ini")
        bad = tmp_path / "bad.ini"
        bad.write_text("[experiment]\nnum_trials = many\n")
        with pytest.raises(ConfigError, match="num_trials"):
            load_config(bad)
        bad.write_text("[desired]\nkind = triangular\n")
        with pytest.raises(ConfigError, match="desired"):
            load_config(bad)


class TestSeeding:
    def test_trial_seed_deterministic_and_distinct(self):
        s1 = _trial_seed(1, 10, 0, 0)
        assert s1 == _trial_seed(1, 10, 0, 0)
        seeds = {_trial_seed(1, M, i, t)
                 for M in (8, 10) for i in (0, 1) for t in (0, 1)}
        assert len(seeds) == 8


class TestRunExperiment:
    def test_record_shape(self, small_records):
        cfg = example1_config(**SMALL)
        expect = len(cfg.methods) * len(cfg.snr_db) * cfg.num_trials
        assert len(small_records) == expect
        for r in small_records:
            assert isinstance(r, TrialRecord)
            assert np.isfinite(r.sinr_db) and np.isfinite(r.objective)
            assert r.method in cfg.methods
        potdc_rows = [r for r in small_records if r.method == "potdc"]
        assert all(np.isfinite(r.lower_bound) for r in potdc_rows)
        assert all(r.lower_bound <= r.objective + 1e-9 for r in potdc_rows)
        others = [r for r in small_records if r.method != "potdc"]
        assert all(np.isnan(r.lower_bound) for r in others)

    def test_deterministic(self, small_records):
        again = run_experiment(example1_config(**SMALL))
        assert again == small_records

    def test_timing_off_by_default(self, small_records):
        assert all(r.wall_time_ms == 0.0 for r in small_records)

    def test_timing_recorded_when_enabled(self):
        recs = run_experiment(example3_config(
            array_sizes=(8,), num_trials=1))
        assert any(r.wall_time_ms > 0.0 for r in recs)


class TestCsvAndAggregation:
    def test_schema_golden(self, small_records, tmp_path):
        out = tmp_path / "a.csv"
        write_csv(small_records, out)
        lines = out.read_text().splitlines()
        assert lines[0] == ("method,M,snr_db,trial,sinr_db,objective,"
                            "lower_bound,iterations,converged,wall_time_ms,seed")
        assert len(lines) == len(small_records) + 1
        row = lines[1].split(",")
        assert len(row) == len(CSV_COLUMNS)
        assert row[0] == "potdc"
        assert row[8] in ("0", "1")        # converged encoded as 0/1
        assert row[9] == "0"               # timing disabled -> 0
        smi_row = next(l for l in lines[1:] if l.startswith("smi,")).split(",")
        assert smi_row[6] == ""            # lower bound blank when unset

    def test_byte_identical(self, small_records, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(small_records, a)
        write_csv(run_experiment(example1_config(**SMALL)), b)
        assert a.read_bytes() == b.read_bytes()

    def test_mean_by_compensated(self):
        recs = [TrialRecord("m", 8, 0.0, t, float(t), 1.0, np.nan, 1, True, 0.0, 0)
                for t in range(5)]
        means = mean_by(recs, ("method", "snr_db"), "sinr_db")
        assert means[("m", 0.0)] == pytest.approx(2.0)

    def test_svg(self, small_records, tmp_path):
        out = tmp_path / "chart.svg"
        write_sinr_svg(small_records, out)
        text = out.read_text()
        assert text.startswith("<svg")
        assert text.count("<polyline") == 4  # one curve per method


class TestCli:
    def test_example_run_exit_ok(self, tmp_path):
        out = tmp_path / "r.csv"
        rc = cli.main(["example1", "--trials", "1", "--snr", "0",
                       "--output", str(out), "--quiet"])
        assert rc == cli.EXIT_OK
        assert out.exists()

    def test_custom_config_exit_ok(self, tmp_path):
        ini = tmp_path / "c.ini"
        ini.write_text("[experiment]\nexample = example1\nnum_trials = 1\n"
                       "snr_db = 0\narray_sizes = 6\n")
        out = tmp_path / "c.csv"
        rc = cli.main(["custom", "--config", str(ini),
                       "--output", str(out), "--quiet"])
        assert rc == cli.EXIT_OK
        assert out.exists()

    def test_config_error_exit_1(self, tmp_path, capsys):
        rc = cli.main(["custom", "--config", str(tmp_path / "nope.ini"),
                       "--quiet"])
        assert rc == cli.EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_selftest_failure_exit_2(self, monkeypatch, capsys):
        from potdc.selftest import SuiteResult
        monkeypatch.setattr(
            cli, "run_selftest",
            lambda **kw: [SuiteResult("descent", False, 1.0, "worst residual 1")])
        rc = cli.main(["selftest"])
        assert rc == cli.EXIT_FAILURE
        assert "FAIL" in capsys.readouterr().out

    def test_infeasible_exit_3(self, tmp_path, capsys):
        # an absurd numeric mismatch bound makes every instance infeasible
        ini = tmp_path / "inf.ini"
        ini.write_text("[experiment]\nexample = example1\nnum_trials = 1\n"
                       "snr_db = 0\narray_sizes = 6\n"
                       "[robust]\neta_rule = 1e6\n")
        rc = cli.main(["custom", "--config", str(ini), "--quiet"])
        assert rc == cli.EXIT_INFEASIBLE
        assert "infeasible" in capsys.readouterr().err

    def test_convexity_subcommand(self, capsys):
        rc = cli.main(["convexity", "--instances", "2", "--grid", "40"])
        assert rc == cli.EXIT_OK
        assert "PASS" in capsys.readouterr().out
