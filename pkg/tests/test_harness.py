import csv
import io
from dataclasses import replace

import numpy as np
import pytest

from dsmimo import (
    ConfigError,
    ExperimentConfig,
    PRESETS,
    emit_csv,
    load_config,
    preset_configs,
    run_point,
    run_single_layer,
    run_sweep,
    run_trial,
)
from dsmimo.cli import main

SMALL = ExperimentConfig(
    scenario="poor", n_t=8, n_r=8, m_t=2, m_r=2, n_s=1, n_users=1,
    snr_db=10.0, outer="cme", inner="met_mer", n_trials=3, n_slots=20,
)


class TestConfigValidation:
    def test_small_config_is_valid(self):
        SMALL.validate()

    @pytest.mark.parametrize(
        "overrides",
        [
            {"scenario": "urban"},
            {"scenario": []},
            {"outer": "zf"},
            {"inner": "dirty_paper"},
            {"layers": 3},
            {"layers": 1},  # outer must then be 'none'
            {"outer": "none"},  # needs layers=1
            {"n_s": 3},  # exceeds m_t = m_r = 2
            {"m_t": 9},  # wider than the array
            {"n_users": [0]},
            {"snr_db": [float("inf")]},
            {"seed": -1},
            {"n_trials": 0},
            {"sigma_n2": 0.0},
        ],
    )
    def test_invalid_configs_rejected(self, overrides):
        with pytest.raises(ConfigError):
            replace(SMALL, **overrides).validate()

    def test_path_selection_needs_enough_paths(self):
        cfg = replace(SMALL, outer="pps", m_t=9, n_t=16)  # poor has L=8
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_single_layer_skips_outer_width_checks(self):
        cfg = replace(SMALL, layers=1, outer="none", n_s=4, m_t=1, m_r=1)
        cfg.validate()  # n_s limited by n_t/n_r, not m_t/m_r

    def test_grid_expansion_order(self):
        cfg = replace(SMALL, scenario=["poor", "fair"], snr_db=[0.0, 10.0, 20.0])
        points = cfg.grid()
        assert len(points) == 6
        assert [(p.scenario, p.snr_db) for p in points[:3]] == [
            ("poor", 0.0), ("poor", 10.0), ("poor", 20.0)
        ]

    def test_run_point_rejects_sweep_axes(self):
        with pytest.raises(ConfigError):
            run_point(replace(SMALL, snr_db=[0.0, 10.0]), seed=0)


class TestDeterminismAndPairing:
    def test_identical_seed_identical_record(self):
        a = run_point(SMALL, seed=5)
        b = run_point(SMALL, seed=5)
        assert a == b

    def test_trials_are_indexed_substreams(self):
        first = run_trial(replace(SMALL, n_trials=1), seed=5, trial=2)
        again = run_trial(replace(SMALL, n_trials=10), seed=5, trial=2)
        assert first.rate == again.rate

    def test_one_and_two_layer_share_draws(self):
        # With a full-width outer stage the two-layer filters span the same
        # subspaces as the one-layer ones, so paired draws give equal rates.
        two = replace(SMALL, m_t=8, m_r=8, n_s=2, n_users=2, n_trials=4)
        one = replace(SMALL, layers=1, outer="none", n_s=2, n_users=2, n_trials=4)
        r_two = run_point(two, seed=9)
        r_one = run_single_layer(one, seed=9)
        assert abs(r_two.mean_rate - r_one.mean_rate) <= 1e-9 * r_one.mean_rate

    def test_snr_points_share_channel_draws(self):
        # Channel substreams never depend on the SNR axis, so for a
        # single-user single-stream trial the two rates are tied by the
        # exact scalar relation r = log2(1 + rho * P_t).
        low = run_trial(replace(SMALL, snr_db=0.0), seed=4, trial=0)
        high = run_trial(replace(SMALL, snr_db=10.0), seed=4, trial=0)
        rho = 2.0**low.rate - 1.0
        assert high.rate == pytest.approx(np.log2(1.0 + 10.0 * rho), rel=1e-9)

    def test_outer_methods_share_channel_draws(self):
        # pps/sps never touch the covariance substream and select the same
        # single strongest path at m_t = m_r = 1, giving identical rates.
        cfg = replace(SMALL, m_t=1, m_r=1)
        sps_rate = run_trial(replace(cfg, outer="sps"), seed=4, trial=1).rate
        pps_rate = run_trial(replace(cfg, outer="pps"), seed=4, trial=1).rate
        assert sps_rate == pps_rate

    def test_stderr_scales_like_inverse_root_trials(self):
        records = {
            n: run_point(replace(SMALL, n_trials=n), seed=7) for n in (100, 400, 1600)
        }
        for small, big in ((100, 400), (400, 1600)):
            ratio = records[small].stderr / records[big].stderr
            assert 1.4 <= ratio <= 2.6

    def test_sweep_workers_do_not_change_results(self):
        cfg = replace(SMALL, n_users=[1, 2], snr_db=[0.0, 10.0])
        serial = emit_csv(run_sweep(cfg, seed=3, workers=1))
        threaded = emit_csv(run_sweep(cfg, seed=3, workers=3))
        assert serial == threaded


class TestFeasibilityHandling:
    def test_bd_infeasible_point_is_flagged(self):
        cfg = replace(SMALL, inner="met_bd", n_users=4)  # 4 > m_r = 2
        record = run_point(cfg, seed=0)
        assert record.status == "infeasible"
        assert record.mean_rate is None and record.n_trials == 0

    def test_congestion_sweep_marks_only_oversubscribed_rows(self):
        cfg = replace(
            SMALL, inner="bd_mer", m_t=4, m_r=4, n_users=[2, 4, 5, 8], n_trials=1
        )
        records = run_sweep(cfg, seed=0)
        assert [r.status for r in records] == ["ok", "ok", "infeasible", "infeasible"]

    def test_single_layer_uses_array_dimensions_for_feasibility(self):
        cfg = replace(SMALL, layers=1, outer="none", inner="met_bd", n_users=8, n_trials=1)
        assert run_point(cfg, seed=0).status == "ok"  # 8 * 1 <= n_r = 8

    def test_run_single_layer_requires_one_layer(self):
        with pytest.raises(ConfigError):
            run_single_layer(SMALL, seed=0)


class TestCsvEmission:
    def test_single_record_two_lines(self):
        text = emit_csv([run_point(replace(SMALL, n_trials=1), seed=1)])
        lines = text.strip().split("\n")
        assert len(lines) == 2
        assert lines[0].startswith("outer,inner,layers,scenario,snr_db")

    def test_infeasible_row_has_empty_rate(self):
        record = run_point(replace(SMALL, inner="met_bd", n_users=4), seed=0)
        row = emit_csv([record]).strip().split("\n")[1]
        fields = row.split(",")
        assert fields[-1] == "infeasible"
        assert fields[-2] == "" and fields[-3] == ""

    def test_round_trip_parse(self):
        records = run_sweep(replace(SMALL, snr_db=[0.0, 10.0]), seed=2)
        parsed = list(csv.DictReader(io.StringIO(emit_csv(records))))
        assert len(parsed) == len(records)
        for row, record in zip(parsed, records):
            assert row["scenario"] == record.scenario
            assert int(row["n_users"]) == record.n_users
            assert float(row["snr_db"]) == record.snr_db
            assert float(row["mean_rate"]) == pytest.approx(record.mean_rate, rel=1e-5)
            assert float(row["stderr"]) == pytest.approx(record.stderr, rel=1e-5, abs=1e-12)

    def test_empty_records_rejected(self):
        with pytest.raises(ValueError):
            emit_csv([])


class TestConfigFile:
    def test_yaml_round_trip(self, tmp_path):
        path = tmp_path / "exp.yaml"
        path.write_text(
            "scenario: poor\n"
            "n_t: 8\nn_r: 8\nm_t: 2\nm_r: 2\nn_s: 1\n"
            "n_users: [1, 2]\nsnr_db: [0, 10]\n"
            "outer: cme\ninner: met_mer\nn_trials: 2\nn_slots: 5\nseed: 11\n"
        )
        cfg = load_config(str(path))
        assert cfg.seed == 11
        assert len(cfg.grid()) == 4

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("scenario: poor\nbandwidth: 100\n")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_non_mapping_rejected(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- poor\n- fair\n")
        with pytest.raises(ConfigError):
            load_config(str(path))


class TestPresets:
    def test_all_presets_validate(self):
        for name in PRESETS:
            configs = preset_configs(name)
            assert configs
            for cfg in configs:
                cfg.validate()

    def test_outer_presets_tie_streams_to_filter_width(self):
        for cfg in preset_configs("outer_fair"):
            assert cfg.m_t == cfg.n_s == cfg.m_r
            assert cfg.n_users == 1

    def test_bench_presets_pair_layer_counts(self):
        layers = [cfg.layers for cfg in preset_configs("bench_met_mmse")]
        assert sorted(set(layers)) == [1, 2]

    def test_unknown_preset(self):
        with pytest.raises(ConfigError):
            preset_configs("outer_swamp")


class TestCli:
    def _write_config(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(
            "scenario: poor\nn_t: 8\nn_r: 8\nm_t: 2\nm_r: 2\nn_s: 1\n"
            "n_users: 1\nsnr_db: [0, 10]\nouter: cme\ninner: met_mer\n"
            "n_trials: 2\nn_slots: 5\nseed: 4\n"
        )
        return path

    def test_run_writes_deterministic_csv(self, tmp_path):
        cfg = self._write_config(tmp_path)
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["run", "--config", str(cfg), "--out", str(out_a)]) == 0
        assert main(["run", "--config", str(cfg), "--out", str(out_b), "--workers", "2"]) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_run_trials_override(self, tmp_path):
        cfg = self._write_config(tmp_path)
        out = tmp_path / "t.csv"
        assert main(["run", "--config", str(cfg), "--trials", "1", "--out", str(out)]) == 0
        rows = list(csv.DictReader(io.StringIO(out.read_text())))
        assert all(row["n_trials"] == "1" for row in rows)

    def test_run_requires_exactly_one_source(self, tmp_path):
        cfg = self._write_config(tmp_path)
        assert main(["run"]) == 2
        assert main(["run", "--config", str(cfg), "--preset", "outer_poor"]) == 2

    def test_run_unknown_preset_is_config_error(self):
        assert main(["run", "--preset", "outer_swamp"]) == 2

    def test_run_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "absent.yaml")]) == 2

    def test_unwritable_output_is_runtime_error(self, tmp_path):
        cfg = self._write_config(tmp_path)
        out = tmp_path / "no_dir" / "x.csv"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 3

    def test_validate_good_and_bad(self, tmp_path):
        cfg = self._write_config(tmp_path)
        assert main(["validate", "--config", str(cfg)]) == 0
        bad = tmp_path / "bad.yaml"
        bad.write_text("scenario: urban\n")
        assert main(["validate", "--config", str(bad)]) == 2

    def test_list_presets(self, capsys):
        assert main(["list-presets"]) == 0
        out = capsys.readouterr().out
        for name in PRESETS:
            assert name in out
