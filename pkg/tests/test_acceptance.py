"""
统计验收测试

在默认场景（N_t=64, N_r=16, L=4, N_p=2, M=64）下复现算法排序、
SNR 非单调性、RF 链数与帧数趋势以及泄漏效应，每点 200 次配对试验。
运行方式：pytest --runslow tests/test_acceptance.py
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from function.bench_harness import Algorithm, SweepAxis, SweepSpec, check_monotonic, run_sweep, run_trial
from function.channel_model import GridMode, SystemConfig

from test_gamp_solvers import recover_single_support

pytestmark = pytest.mark.slow

TRIALS = 200
WORKERS = 4
ALL = (Algorithm.ONE_BIT_GAMP, Algorithm.AWGN_GAMP, Algorithm.LS_UNQUANTIZED)


def paired_nmse(cfg, algorithms=ALL, trials=TRIALS):
    with ThreadPoolExecutor(max_workers=WORKERS) as pool:
        results = list(pool.map(lambda seed: run_trial(cfg, algorithms, seed), range(trials)))
    return {a: np.array([r.nmse[a] for r in results]) for a in algorithms}


def paired_gap(worse, better):
    diff = worse - better
    return diff.mean(), diff.std(ddof=1) / np.sqrt(diff.size)


@pytest.mark.parametrize("snr_db", [-20.0, -10.0, 0.0])
def test_algorithm_ordering(snr_db):
    errors = paired_nmse(SystemConfig(snr_db=snr_db))
    for worse, better in ((Algorithm.AWGN_GAMP, Algorithm.ONE_BIT_GAMP),
                          (Algorithm.LS_UNQUANTIZED, Algorithm.AWGN_GAMP)):
        gap, stderr = paired_gap(errors[worse], errors[better])
        assert gap > 2 * stderr, f"{worse.value} vs {better.value} at {snr_db} dB"

    assert errors[Algorithm.LS_UNQUANTIZED].mean() >= 2 * errors[Algorithm.ONE_BIT_GAMP].mean()


def test_one_bit_beats_ls_per_trial():
    errors = paired_nmse(SystemConfig(snr_db=0.0), (Algorithm.ONE_BIT_GAMP, Algorithm.LS_UNQUANTIZED))
    wins = np.count_nonzero(errors[Algorithm.ONE_BIT_GAMP] < errors[Algorithm.LS_UNQUANTIZED])
    assert wins >= 0.9 * TRIALS


def test_ls_gap_across_snr():
    spec = SweepSpec(SystemConfig(), SweepAxis.SNR_DB, [-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0],
                     [Algorithm.ONE_BIT_GAMP, Algorithm.LS_UNQUANTIZED], TRIALS, 0)
    report = run_sweep(spec, workers=WORKERS)
    one_bit = dict(report.mean_curve(Algorithm.ONE_BIT_GAMP))
    for value, ls_mean in report.mean_curve(Algorithm.LS_UNQUANTIZED):
        assert ls_mean >= 2 * one_bit[value]


def test_one_bit_minimum_at_interior_snr():
    spec = SweepSpec(SystemConfig(), SweepAxis.SNR_DB, [float(v) for v in range(-30, 11, 5)],
                     [Algorithm.ONE_BIT_GAMP], TRIALS, 0)
    curve = run_sweep(spec, workers=WORKERS).mean_curve(Algorithm.ONE_BIT_GAMP)
    values, means = zip(*curve)
    best = int(np.argmin(means))
    assert -15.0 <= values[best] <= 0.0
    assert means[0] > means[best] and means[-1] > means[best]


@pytest.mark.parametrize("snr_db", [-20.0, -10.0, 0.0])
def test_rf_chain_trend(snr_db):
    spec = SweepSpec(SystemConfig(snr_db=snr_db), SweepAxis.RF_CHAINS, [2, 4, 8], ALL, TRIALS, 0)
    report = run_sweep(spec, workers=WORKERS)
    for algorithm in ALL:
        assert check_monotonic(report, algorithm) == []


def test_frame_trend_and_best_snr():
    curves = {}
    for snr_db in (-20.0, -9.0, 5.0):
        spec = SweepSpec(SystemConfig(snr_db=snr_db), SweepAxis.FRAMES, [16, 32, 64, 128],
                         [Algorithm.ONE_BIT_GAMP], TRIALS, 0)
        report = run_sweep(spec, workers=WORKERS)
        assert check_monotonic(report, Algorithm.ONE_BIT_GAMP) == []
        curves[snr_db] = dict(report.mean_curve(Algorithm.ONE_BIT_GAMP))

    for frames, best in curves[-9.0].items():
        assert best < curves[-20.0][frames]
        assert best < curves[5.0][frames]


@pytest.mark.parametrize("snr_db", [-20.0, -10.0, 0.0])
def test_leakage_degrades_one_bit_gamp(snr_db):
    means = {}
    for mode in GridMode:
        errors = paired_nmse(SystemConfig(snr_db=snr_db, grid_mode=mode), (Algorithm.ONE_BIT_GAMP,))
        means[mode] = errors[Algorithm.ONE_BIT_GAMP].mean()
    assert means[GridMode.ON_GRID] < means[GridMode.OFF_GRID]


def test_single_support_recovery_rate():
    hits = recover_single_support(np.random.default_rng(7), 1000)
    assert hits >= 950
