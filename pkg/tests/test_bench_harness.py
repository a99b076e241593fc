import math

import numpy as np
import pytest

import function.bench_harness as bench
from function.bench_harness import (Algorithm, BenchHarness, NmseReport, NmseRow, SweepAxis,
                                    SweepSpec, TrialFailedError, check_monotonic, emit_report,
                                    run_sweep, run_trial, trace_trial)
from function.channel_model import SystemConfig
from function.gamp_solvers import GampDivergenceError, GampTrace

ALL = [Algorithm.ONE_BIT_GAMP, Algorithm.AWGN_GAMP, Algorithm.LS_UNQUANTIZED]


def toy_config(**changes):
    base = SystemConfig(n_tx=8, n_rx=4, l_tx=2, l_rx=2, n_streams=1, n_paths=1, n_frames=8,
                        gamp_iters=20)
    return base.replace(**changes)


def make_row(value, algorithm, mean):
    return NmseRow(SweepAxis.FRAMES, value, algorithm, mean, mean, 0.0, 1, 0, 0)


class TestRunTrial:
    def test_deterministic(self):
        cfg = toy_config()
        a = run_trial(cfg, ALL, 17)
        b = run_trial(cfg, ALL, 17)
        assert a.nmse == b.nmse
        assert a.scaled_nmse == b.scaled_nmse
        assert set(a.nmse) == set(ALL)

    def test_algorithm_subset_does_not_change_data(self):
        cfg = toy_config()
        full = run_trial(cfg, ALL, 3)
        only_ls = run_trial(cfg, [Algorithm.LS_UNQUANTIZED], 3)
        assert only_ls.nmse[Algorithm.LS_UNQUANTIZED] == full.nmse[Algorithm.LS_UNQUANTIZED]

    def test_square_noiseless_ls_is_exact(self):
        cfg = SystemConfig(n_tx=2, n_rx=2, l_tx=1, l_rx=1, n_streams=1, n_paths=1, n_frames=4,
                           snr_db=200.0)
        for seed in range(3):
            result = run_trial(cfg, [Algorithm.LS_UNQUANTIZED], seed)
            assert result.nmse[Algorithm.LS_UNQUANTIZED] < 1e-10

    def test_scaled_not_above_raw(self):
        result = run_trial(toy_config(snr_db=10.0), ALL, 5)
        for algorithm in ALL:
            assert result.scaled_nmse[algorithm] <= result.nmse[algorithm] + 1e-12

    def test_divergence_reported_with_seed(self, monkeypatch):
        def broken(*args, **kwargs):
            raise GampDivergenceError("boom", 1, GampTrace())

        monkeypatch.setattr(bench, "one_bit_gamp", broken)
        with pytest.raises(TrialFailedError) as info:
            run_trial(toy_config(), ALL, 42)
        assert info.value.trial_seed == 42
        assert info.value.algorithm is Algorithm.ONE_BIT_GAMP

    @pytest.mark.parametrize("seed", [16, 0, 1, 2, 3])
    def test_one_bit_gamp_stays_bounded_at_moderate_snr(self, seed):
        # 默认阵列规模，较少帧数时结构化测量矩阵最容易使迭代失控
        cfg = SystemConfig(snr_db=-9.0, n_frames=32)
        result = run_trial(cfg, [Algorithm.ONE_BIT_GAMP], seed)
        assert result.nmse[Algorithm.ONE_BIT_GAMP] < 1.5

    def test_trace_trial(self):
        trace = trace_trial(toy_config(), 0)
        assert 1 <= trace.iterations <= 20
        assert all(np.isfinite(row[2]) for row in trace.rows)


class TestSweepSpec:
    def test_algorithms_sorted_and_deduplicated(self):
        spec = SweepSpec(toy_config(), "snr", [0.0], ["ls", "onebit", "awgn", "ls"], 1, 0)
        assert spec.algorithms == (Algorithm.AWGN_GAMP, Algorithm.LS_UNQUANTIZED, Algorithm.ONE_BIT_GAMP)
        assert spec.axis is SweepAxis.SNR_DB

    @pytest.mark.parametrize("values, algorithms, trials, seed", [
        ([], ["ls"], 1, 0),
        ([1, 1], ["ls"], 1, 0),
        ([2, 1], ["ls"], 1, 0),
        ([1], [], 1, 0),
        ([1], ["ls"], 0, 0),
        ([1], ["ls"], 1, -1),
        ([1], ["ls"], 2, 2 ** 64 - 1),
    ])
    def test_invalid(self, values, algorithms, trials, seed):
        with pytest.raises(ValueError):
            SweepSpec(toy_config(), SweepAxis.FRAMES, values, algorithms, trials, seed)

    def test_rf_chain_axis_clips_streams(self):
        cfg = toy_config(n_tx=16, n_rx=16, l_tx=4, l_rx=4, n_streams=4)
        assert SweepAxis.RF_CHAINS.apply(cfg, 2).n_streams == 2
        assert SweepAxis.RF_CHAINS.apply(cfg, 8).l_rx == 8


class TestRunSweep:
    def test_report_shape(self):
        spec = SweepSpec(toy_config(), SweepAxis.SNR_DB, [-10.0, 0.0], ALL, 1, 7)
        report = run_sweep(spec)
        assert len(report.rows) == 6
        assert [(r.value, r.algorithm.value) for r in report.rows] == sorted(
            (v, a.value) for v in (-10.0, 0.0) for a in ALL)
        for row in report.rows:
            assert (row.trials, row.seed_lo, row.seed_hi) == (1, 7, 7)
            assert row.stderr == 0.0
            assert row.mean_nmse == row.median_nmse

    def test_same_seeds_at_every_point(self):
        spec = SweepSpec(toy_config(), SweepAxis.FRAMES, [4, 8], ["ls"], 3, 100)
        report = run_sweep(spec)
        for row in report.rows:
            cfg = SweepAxis.FRAMES.apply(toy_config(), row.value)
            expected = [run_trial(cfg, ["ls"], s).nmse[Algorithm.LS_UNQUANTIZED] for s in (100, 101, 102)]
            assert row.mean_nmse == pytest.approx(np.mean(expected), rel=1e-12)
            assert row.stderr == pytest.approx(np.std(expected, ddof=1) / np.sqrt(3), rel=1e-9)

    def test_workers_do_not_change_results(self):
        spec = SweepSpec(toy_config(), SweepAxis.SNR_DB, [0.0], ["onebit", "ls"], 4, 0)
        serial = BenchHarness(workers=1, show_progress=False).run_sweep(spec)
        parallel = BenchHarness(workers=3, show_progress=False).run_sweep(spec)
        assert [r.as_record() for r in serial.rows] == [r.as_record() for r in parallel.rows]

    def test_failed_row_is_marked(self, monkeypatch):
        real_run_trial = bench.run_trial

        def flaky(cfg, algorithms, trial_seed):
            if trial_seed == 1:
                raise TrialFailedError(trial_seed, Algorithm.ONE_BIT_GAMP, "boom")
            return real_run_trial(cfg, algorithms, trial_seed)

        monkeypatch.setattr(bench, "run_trial", flaky)
        spec = SweepSpec(toy_config(), SweepAxis.SNR_DB, [0.0], ["ls"], 3, 0)
        row = run_sweep(spec).rows[0]
        assert row.failed
        assert row.failures == 1
        assert math.isnan(row.mean_nmse) and math.isnan(row.stderr)
        assert row.trials == 3

    def test_invalid_worker_count(self):
        with pytest.raises(ValueError):
            BenchHarness(workers=0)


class TestEmitReport:
    def test_empty_report(self, tmp_path):
        path = tmp_path / "r.csv"
        emit_report(NmseReport(), path)
        assert path.read_text(encoding="utf-8").count("\n") == 1

    def test_rows_sorted_and_byte_identical(self, tmp_path):
        rows = [make_row(32, Algorithm.ONE_BIT_GAMP, 0.2), make_row(16, Algorithm.LS_UNQUANTIZED, 0.1),
                make_row(16, Algorithm.AWGN_GAMP, 0.3), make_row(32, Algorithm.AWGN_GAMP, 0.25)]
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_report(NmseReport(rows), first)
        emit_report(NmseReport(list(reversed(rows))), second)
        lines = first.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 5
        assert [line.split(",")[:3] for line in lines[1:]] == [
            ["frames", "16", "awgn"], ["frames", "16", "ls"], ["frames", "32", "awgn"], ["frames", "32", "onebit"],
        ]
        assert first.read_bytes() == second.read_bytes()


def test_check_monotonic():
    report = NmseReport([
        make_row(16, Algorithm.AWGN_GAMP, 0.5),
        make_row(32, Algorithm.AWGN_GAMP, 0.3),
        make_row(64, Algorithm.AWGN_GAMP, 0.35),
        make_row(16, Algorithm.LS_UNQUANTIZED, 0.9),
    ])
    assert check_monotonic(report, Algorithm.AWGN_GAMP) == [(32, 64, 0.3, 0.35)]
    assert check_monotonic(report, "ls") == []
