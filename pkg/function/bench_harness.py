"""
蒙特卡洛基准测试

该模块负责按试验种子生成信道、硬件和噪声，
在同一组数据上运行各个估计算法，并沿 SNR / 帧数 / RF 链数扫描汇总 NMSE。
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from tqdm import tqdm
from tqdm.contrib.logging import logging_redirect_tqdm

from .channel_model import from_virtual, generate_channel, spawn_streams
from .denoisers import SparsePrior
from .file_handler import FileHandler
from .gamp_solvers import (GampDivergenceError, awgn_gamp, ls_estimate, nmse, one_bit_gamp,
                           scaled_nmse)
from .measurement import build_ensemble, complexify

logger = logging.getLogger(__name__)

# 一行中允许中止的试验比例上限
MAX_FAILURE_RATIO = 0.01


class Algorithm(Enum):
    ONE_BIT_GAMP = "onebit"
    AWGN_GAMP = "awgn"
    LS_UNQUANTIZED = "ls"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "onebit": cls.ONE_BIT_GAMP, "onebitgamp": cls.ONE_BIT_GAMP,
            "awgn": cls.AWGN_GAMP, "awgngamp": cls.AWGN_GAMP, "gamp": cls.AWGN_GAMP,
            "ls": cls.LS_UNQUANTIZED, "lsunquantized": cls.LS_UNQUANTIZED,
        }
        if key not in aliases:
            raise ValueError(f"未知的估计算法: {text}")
        return aliases[key]


class SweepAxis(Enum):
    SNR_DB = "snr"
    FRAMES = "frames"
    RF_CHAINS = "rfchains"

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("_", "").replace("-", "")
        for axis in cls:
            if axis.value == key:
                return axis
        raise ValueError(f"未知的扫描轴: {text}")

    def apply(self, cfg, value):
        """把扫描值写入配置中对应的字段"""
        if self is SweepAxis.SNR_DB:
            return cfg.replace(snr_db=float(value))
        if self is SweepAxis.FRAMES:
            return cfg.replace(n_frames=int(value))
        chains = int(value)
        return cfg.replace(l_tx=chains, l_rx=chains, n_streams=min(cfg.n_streams, chains))


DEFAULT_GRIDS = {
    SweepAxis.SNR_DB: [float(v) for v in range(-30, 11, 5)],
    SweepAxis.FRAMES: [16, 32, 64, 128],
    SweepAxis.RF_CHAINS: [2, 4, 8],
}


class TrialFailedError(RuntimeError):
    """单次试验中某个求解器中止"""

    def __init__(self, trial_seed, algorithm, cause):
        super().__init__(f"试验 seed={trial_seed} 中 {algorithm.value} 求解器中止: {cause}")
        self.trial_seed = trial_seed
        self.algorithm = algorithm
        self.cause = cause


@dataclass(frozen=True)
class SweepSpec:
    """一次扫描实验的描述"""

    base: object
    axis: SweepAxis
    values: tuple
    algorithms: tuple
    trials: int
    seed_base: int

    def __post_init__(self):
        object.__setattr__(self, "axis", SweepAxis.parse(self.axis))
        object.__setattr__(self, "values", tuple(self.values))
        algorithms = sorted({Algorithm.parse(a) for a in self.algorithms}, key=lambda a: a.value)
        object.__setattr__(self, "algorithms", tuple(algorithms))
        if not self.values:
            raise ValueError("扫描值列表不能为空")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError(f"扫描值必须严格递增: {list(self.values)}")
        if not self.algorithms:
            raise ValueError("至少需要一个估计算法")
        if self.trials < 1:
            raise ValueError(f"试验次数必须为正整数: {self.trials}")
        if self.seed_base < 0 or self.seed_base + self.trials - 1 >= 2 ** 64:
            raise ValueError(f"种子超出 64 位无符号整数范围: {self.seed_base}")


@dataclass(frozen=True)
class NmseRow:
    axis: SweepAxis
    value: float
    algorithm: Algorithm
    mean_nmse: float
    median_nmse: float
    stderr: float
    trials: int
    seed_lo: int
    seed_hi: int
    failures: int = 0
    mean_scaled_nmse: float = float("nan")

    @property
    def failed(self):
        return self.failures > MAX_FAILURE_RATIO * self.trials

    def as_record(self):
        return (self.axis.value, self.value, self.algorithm.value, self.mean_nmse,
                self.median_nmse, self.stderr, self.trials, self.seed_lo, self.seed_hi)


@dataclass
class NmseReport:
    """扫描结果，按 (扫描值, 算法名) 排序"""

    rows: list = field(default_factory=list)

    def sorted_rows(self):
        return sorted(self.rows, key=lambda row: (row.value, row.algorithm.value))

    def select(self, algorithm):
        algorithm = Algorithm.parse(algorithm)
        return [row for row in self.sorted_rows() if row.algorithm is algorithm]

    def mean_curve(self, algorithm):
        """某算法的 (扫描值, 平均 NMSE) 曲线"""
        return [(row.value, row.mean_nmse) for row in self.select(algorithm)]


@dataclass(frozen=True)
class TrialResult:
    trial_seed: int
    nmse: dict
    scaled_nmse: dict


def _solver_options(cfg):
    return dict(damping=cfg.gamp_damping, tol=cfg.gamp_tol, adaptive=cfg.gamp_adaptive)


def _estimate_virtual(algorithm, cfg, ensemble, prior):
    if algorithm is Algorithm.LS_UNQUANTIZED:
        # LS 基线使用未量化的复观测
        h_v_vec = ls_estimate(ensemble.w_complex, ensemble.r_complex)
    else:
        # 两种 GAMP 都只看到 ±1 符号
        solver = one_bit_gamp if algorithm is Algorithm.ONE_BIT_GAMP else awgn_gamp
        h_real, _ = solver(ensemble.w_real, ensemble.y_sign, prior, ensemble.noise_var_real,
                           cfg.gamp_iters, **_solver_options(cfg))
        h_v_vec = complexify(h_real)
    # vec(H_v) 按列堆叠，还原时同样按列
    return h_v_vec.reshape(cfg.n_rx, cfg.n_tx, order="F")


def run_trial(cfg, algorithms, trial_seed):
    """
    单次蒙特卡洛试验

    由 trial_seed 派生出信道、硬件、噪声三路独立随机流，所有算法使用同一组数据；
    估计结果经 Ĥ = U_r Ĥ_v U_t^H 映射回天线域后计算 NMSE。

    Args:
        cfg (SystemConfig): 场景参数
        algorithms (Iterable): 需要运行的算法
        trial_seed (int): 试验种子

    Returns:
        TrialResult: 每个算法的 NMSE 与缩放后 NMSE

    Raises:
        TrialFailedError: 求解器中止，附带试验种子
    """
    channel_rng, hardware_rng, noise_rng = spawn_streams(trial_seed, 3)
    channel = generate_channel(cfg, channel_rng)
    ensemble = build_ensemble(cfg, channel, hardware_rng, noise_rng)
    prior = SparsePrior.from_config(cfg)

    errors, scaled = {}, {}
    for algorithm in sorted({Algorithm.parse(a) for a in algorithms}, key=lambda a: a.value):
        try:
            h_v_est = _estimate_virtual(algorithm, cfg, ensemble, prior)
        except GampDivergenceError as exc:
            raise TrialFailedError(trial_seed, algorithm, exc) from exc
        h_est = from_virtual(h_v_est)
        errors[algorithm] = nmse(channel.h, h_est)
        scaled[algorithm] = scaled_nmse(channel.h, h_est)
    return TrialResult(trial_seed=trial_seed, nmse=errors, scaled_nmse=scaled)


def trace_trial(cfg, trial_seed):
    """以与 run_trial 相同的数据运行一比特 GAMP，并返回带 NMSE 代理值的逐次迭代诊断"""
    channel_rng, hardware_rng, noise_rng = spawn_streams(trial_seed, 3)
    channel = generate_channel(cfg, channel_rng)
    ensemble = build_ensemble(cfg, channel, hardware_rng, noise_rng)
    _, trace = one_bit_gamp(ensemble.w_real, ensemble.y_sign, SparsePrior.from_config(cfg),
                            ensemble.noise_var_real, cfg.gamp_iters, h_true=ensemble.h_v_real,
                            **_solver_options(cfg))
    return trace


def _summarize(axis, value, algorithm, values, scaled, trials, seed_lo, seed_hi):
    failures = trials - len(values)
    row_failed = failures > MAX_FAILURE_RATIO * trials
    if row_failed or not values:
        nan = float("nan")
        return NmseRow(axis, value, algorithm, nan, nan, nan, trials, seed_lo, seed_hi, failures)

    data = np.asarray(values, dtype=float)
    stderr = float(np.std(data, ddof=1) / np.sqrt(data.size)) if data.size > 1 else 0.0
    return NmseRow(
        axis=axis, value=value, algorithm=algorithm,
        mean_nmse=float(np.mean(data)),
        median_nmse=float(np.median(data)),
        stderr=stderr,
        trials=trials, seed_lo=seed_lo, seed_hi=seed_hi,
        failures=failures,
        mean_scaled_nmse=float(np.mean(scaled)),
    )


class BenchHarness:
    """扫描实验驱动器

    该类按扫描轴依次覆盖配置字段，对每个扫描值运行相同种子列表的试验，
    并汇总平均值、中位数与标准误。
    """

    def __init__(self, workers=1, show_progress=True):
        """初始化扫描驱动器

        Args:
            workers (int, optional): 并行试验的线程数，默认为 1
            show_progress (bool, optional): 是否显示进度条
        """
        if workers < 1:
            raise ValueError(f"线程数必须为正整数: {workers}")
        self.workers = workers
        self.show_progress = show_progress

    def _run_trials(self, cfg, algorithms, seeds, label):
        def attempt(seed):
            try:
                return run_trial(cfg, algorithms, seed)
            except TrialFailedError as exc:
                logger.warning("%s", exc)
                return exc

        bar = tqdm(total=len(seeds), desc=label, leave=False, disable=not self.show_progress)
        with logging_redirect_tqdm(), bar:
            if self.workers == 1:
                results = []
                for seed in seeds:
                    results.append(attempt(seed))
                    bar.update(1)
            else:
                # 结果按种子顺序收集，与调度顺序无关
                with ThreadPoolExecutor(max_workers=self.workers) as pool:
                    futures = [pool.submit(attempt, seed) for seed in seeds]
                    results = []
                    for future in futures:
                        results.append(future.result())
                        bar.update(1)
        return results

    def run_sweep(self, spec):
        """
        执行一次扫描实验

        Args:
            spec (SweepSpec): 扫描描述

        Returns:
            NmseReport: 每个 (扫描值, 算法) 一行的汇总结果
        """
        seeds = [spec.seed_base + i for i in range(spec.trials)]
        seed_lo, seed_hi = seeds[0], seeds[-1]
        report = NmseReport()

        for value in spec.values:
            cfg = spec.axis.apply(spec.base, value)
            label = f"{spec.axis.value}={value}"
            logger.info("开始扫描点 %s，共 %d 次试验", label, spec.trials)
            results = self._run_trials(cfg, spec.algorithms, seeds, label)

            # 中止的试验对所有算法都不计入统计
            ok = [r for r in results if isinstance(r, TrialResult)]
            for algorithm in spec.algorithms:
                values = [r.nmse[algorithm] for r in ok]
                scaled = [r.scaled_nmse[algorithm] for r in ok]
                row = _summarize(spec.axis, value, algorithm, values, scaled,
                                 spec.trials, seed_lo, seed_hi)
                if row.failed:
                    logger.warning("扫描点 %s 的 %s 有 %d 次试验中止，该行标记为失败",
                                   label, algorithm.value, row.failures)
                else:
                    logger.info("%s %s: 平均 NMSE %.4e (±%.1e)", label, algorithm.value,
                                row.mean_nmse, row.stderr)
                report.rows.append(row)

        report.rows = report.sorted_rows()
        return report


def run_sweep(spec, workers=1, show_progress=False):
    """以默认驱动器执行扫描"""
    return BenchHarness(workers=workers, show_progress=show_progress).run_sweep(spec)


def emit_report(report, path):
    """
    把报告写成 CSV

    表头为 axis,value,algorithm,mean_nmse,median_nmse,stderr,trials,seed_lo,seed_hi，
    行按 (扫描值, 算法名) 排序。

    Raises:
        OSError: 文件无法写入
    """
    FileHandler.write_report_csv([row.as_record() for row in report.sorted_rows()], path)


def check_monotonic(report, algorithm):
    """检查平均 NMSE 是否随扫描值严格下降

    Returns:
        list: 违反趋势的相邻扫描值对 [(前一值, 后一值, 前一 NMSE, 后一 NMSE)]
    """
    curve = report.mean_curve(algorithm)
    return [(a, b, ea, eb) for (a, ea), (b, eb) in zip(curve, curve[1:]) if not eb < ea]
