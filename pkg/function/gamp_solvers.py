"""
GAMP 信道估计算法

该模块实现考虑加性噪声的一比特 GAMP、以符号值作为实观测的
AWGN 输出 GAMP 基线、无量化最小二乘基线以及 NMSE 指标。

两种 GAMP 共用同一套带阻尼的递推：ŝ、v_s 以及回代到估计更新中的 ĥ
按步长做凸组合。开启自适应步长时，每次迭代先计算候选点的代价
J = Σ D(b‖p) − Σ E[log p(y|z)]，代价上升则退回上一个被接受的点并把步长减半，
被接受后步长放大 1.1 倍（不超过设定的阻尼系数）。结束时若最后的估计
代价高于迭代中被接受过的最低代价点，则返回后者。
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.special import log_ndtr

from .denoisers import prior_denoiser, prior_divergence, truncated_gaussian_moments

logger = logging.getLogger(__name__)

VAR_MIN = 1e-12
VAR_MAX = 1e12

STEP_DECREASE = 0.5
STEP_INCREASE = 1.1
# 步长下限，处于下限时候选点总被接受
STEP_MIN = 0.01
# 代价比较的相对容差，收敛附近的舍入误差不触发退回
COST_SLACK = 1e-9

# 标准正态期望的 Gauss-Hermite 求积节点与权重
_GH_NODES, _GH_WEIGHTS = hermegauss(24)
_GH_WEIGHTS = _GH_WEIGHTS / np.sqrt(2.0 * np.pi)


class GampDivergenceError(RuntimeError):
    """GAMP 迭代中出现非有限值（钳位后仍无法恢复）"""

    def __init__(self, message, iteration, trace):
        super().__init__(message)
        self.iteration = iteration
        self.trace = trace


@dataclass
class GampState:
    """GAMP 单次迭代后的全部状态向量"""

    h_hat: np.ndarray
    v_h: np.ndarray
    s_hat: np.ndarray
    v_s: np.ndarray
    p_hat: np.ndarray
    v_p: np.ndarray
    r_hat: np.ndarray
    v_r: np.ndarray
    iter: int = 0


@dataclass
class GampTrace:
    """逐次迭代的诊断信息

    rows 中每一项为 (迭代序号, 相对变化量, NMSE 代理值或 NaN, v_h 均值, 步长)。
    """

    rows: list = field(default_factory=list)
    converged: bool = False

    CSV_HEADER = ("iteration", "relative_change", "nmse_proxy", "mean_v_h", "step")

    def record(self, iteration, change, nmse_proxy, mean_v_h, step=1.0):
        self.rows.append((iteration, float(change), float(nmse_proxy), float(mean_v_h), float(step)))

    @property
    def iterations(self):
        return len(self.rows)


@dataclass
class _Checkpoint:
    """最近一次被接受的迭代起点，代价上升时从这里重走"""

    h_hat: np.ndarray
    v_h: np.ndarray
    divergence: float
    s_hat: np.ndarray
    v_s: np.ndarray
    h_bar: np.ndarray
    cost: float


def _clamp(v):
    return np.clip(v, VAR_MIN, VAR_MAX)


def _cost_limit(cost):
    return cost + COST_SLACK * max(1.0, abs(cost))


def _check_dimensions(w_real, y, h_true):
    if w_real.ndim != 2:
        raise ValueError(f"测量矩阵必须是二维的: ndim={w_real.ndim}")
    if y.shape != (w_real.shape[0],):
        raise ValueError(f"观测长度与测量矩阵行数不一致: {y.shape} vs {w_real.shape}")
    if h_true is not None and h_true.shape != (w_real.shape[1],):
        raise ValueError(f"真值长度与测量矩阵列数不一致: {h_true.shape} vs {w_real.shape}")


def _check_finite(t, trace, *arrays):
    if not all(np.all(np.isfinite(a)) for a in arrays):
        raise GampDivergenceError(f"GAMP 在第 {t} 次迭代出现非有限值", t, trace)


def _one_bit_output(y, p_hat, v_p, noise_var):
    total = v_p + noise_var
    z_mean, z_var = truncated_gaussian_moments(y, p_hat, total)
    s_hat = (z_mean - p_hat) / total
    v_s = (1.0 - z_var / total) / total
    return s_hat, v_s


def _one_bit_cost(y, z_hat, v_p, noise_var):
    # −Σ E[log Φ(y·z/σ)]，z ~ N(ẑ, v_p)
    z = z_hat[:, None] + np.sqrt(v_p)[:, None] * _GH_NODES
    log_lik = log_ndtr(y[:, None] * z / np.sqrt(noise_var))
    return -float(np.sum(log_lik @ _GH_WEIGHTS))


def _awgn_output(y, p_hat, v_p, noise_var):
    total = v_p + noise_var
    return (y - p_hat) / total, 1.0 / total


def _awgn_cost(y, z_hat, v_p, noise_var):
    # −Σ E[log N(y; z, σ²)]，z ~ N(ẑ, v_p)
    residual = (y - z_hat) ** 2 + v_p
    return float(np.sum(0.5 * np.log(2.0 * np.pi * noise_var) + residual / (2.0 * noise_var)))


def _run_gamp(w_real, y, prior, noise_var_real, max_iters, output_step, output_cost,
              damping=1.0, tol=1e-6, adaptive=True, h_true=None):
    """GAMP 主循环，输出端更新由 output_step 决定，代价的输出端部分由 output_cost 决定

    Returns:
        tuple: (最终 GampState, GampTrace)
    """
    w_real = np.asarray(w_real, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_dimensions(w_real, y, h_true)
    if not noise_var_real > 0:
        raise ValueError(f"噪声方差必须为正: {noise_var_real}")
    if max_iters < 1:
        raise ValueError(f"迭代次数必须为正整数: {max_iters}")
    if not 0.1 <= damping <= 1.0:
        raise ValueError(f"阻尼系数必须位于 [0.1, 1]: {damping}")

    n_meas, n_coef = w_real.shape
    w_sq = w_real * w_real
    truth_energy = float(h_true @ h_true) if h_true is not None else 0.0

    # 初始化：ĥ = E[h_v]，v_h = Var[h_v]，ŝ = 0；此时后验即先验，散度为 0
    h_hat = np.full(n_coef, prior.prior_mean)
    v_h = np.full(n_coef, _clamp(prior.prior_var))
    divergence = 0.0
    s_hat = np.zeros(n_meas)
    v_s = None
    h_bar = h_hat
    r_hat = v_r = None
    step = damping
    accepted = best = None
    trace = GampTrace()

    def cost_of(h, variances, div):
        v_p_h = _clamp(w_sq @ variances)
        return div + output_cost(y, w_real @ h, v_p_h, noise_var_real)

    for t in range(1, max_iters + 1):
        # 测量更新
        v_p = _clamp(w_sq @ v_h)
        p_hat = w_real @ h_hat - v_p * s_hat
        _check_finite(t, trace, p_hat, v_p)

        if adaptive:
            cost = cost_of(h_hat, v_h, divergence)
            _check_finite(t, trace, cost)
            if accepted is not None and step > STEP_MIN and cost > _cost_limit(accepted.cost):
                # 代价上升：从上一个被接受的点以更小的步长重走
                step = max(STEP_MIN, step * STEP_DECREASE)
                h_hat, v_h, divergence = accepted.h_hat, accepted.v_h, accepted.divergence
                s_hat, v_s, h_bar = accepted.s_hat, accepted.v_s, accepted.h_bar
                v_p = _clamp(w_sq @ v_h)
                p_hat = w_real @ h_hat - v_p * s_hat
            else:
                if accepted is not None:
                    step = min(damping, step * STEP_INCREASE)
                accepted = _Checkpoint(h_hat, v_h, divergence, s_hat, v_s, h_bar, cost)
                if best is None or cost < best.cost:
                    best = accepted

        s_new, v_s_new = output_step(y, p_hat, v_p, noise_var_real)
        v_s_new = _clamp(v_s_new)
        s_hat = step * s_new + (1.0 - step) * s_hat
        # 第一次迭代没有可供组合的 v_s
        v_s = v_s_new if v_s is None else step * v_s_new + (1.0 - step) * v_s
        h_bar = step * h_hat + (1.0 - step) * h_bar

        # 估计更新
        v_r = _clamp(1.0 / _clamp(w_sq.T @ v_s))
        r_hat = h_bar + v_r * (w_real.T @ s_hat)
        _check_finite(t, trace, r_hat, v_r)
        h_new, v_h_new = prior_denoiser(r_hat, v_r, prior)
        v_h_new = _clamp(v_h_new)
        _check_finite(t, trace, h_new, v_h_new)
        if adaptive:
            divergence = float(np.sum(prior_divergence(r_hat, v_r, h_new, v_h_new, prior)))

        change = np.linalg.norm(h_new - h_hat) / max(np.linalg.norm(h_hat), 1e-12)
        proxy = np.nan
        if h_true is not None and truth_energy > 0:
            err = h_new - h_true
            proxy = float(err @ err) / truth_energy
        trace.record(t, change, proxy, np.mean(v_h_new), step)
        logger.debug("GAMP 迭代 %d: 相对变化 %.3e, 步长 %.3g, NMSE 代理 %.4g", t, change, step, proxy)

        h_hat, v_h = h_new, v_h_new
        if change < tol:
            trace.converged = True
            break

    if adaptive and best is not None and cost_of(h_hat, v_h, divergence) > _cost_limit(best.cost):
        logger.debug("GAMP 最终估计的代价高于此前被接受的最低代价点，返回后者")
        h_hat, v_h, s_hat, v_s = best.h_hat, best.v_h, best.s_hat, best.v_s

    v_p = _clamp(w_sq @ v_h)
    state = GampState(h_hat=h_hat, v_h=v_h, s_hat=s_hat, v_s=v_s, p_hat=w_real @ h_hat - v_p * s_hat,
                      v_p=v_p, r_hat=r_hat, v_r=v_r, iter=trace.iterations)
    return state, trace


def one_bit_gamp(w_real, y_sign, prior, noise_var_real, T, damping=1.0, tol=1e-6, adaptive=True,
                 h_true=None):
    """一比特 GAMP（考虑加性噪声）

    输出端以 r ~ N(p̂_i, v_p,i + σ²) 截断到观测符号所选半轴后的矩计算 ŝ 与 v_s，
    输入端使用 Bernoulli-Gaussian 去噪器。迭代 T 次或相对变化量低于 tol 时停止。

    Args:
        w_real (numpy.ndarray): 实数提升后的测量矩阵
        y_sign (numpy.ndarray): ±1 观测
        prior (SparsePrior): 先验
        noise_var_real (float): 每个实分量的噪声方差
        T (int): 最大迭代次数
        damping (float, optional): ŝ、v_s 与回代 ĥ 的阻尼系数（自适应时为步长上限），1.0 表示不阻尼
        tol (float, optional): 提前停止阈值
        adaptive (bool, optional): 是否按代价自适应调整步长
        h_true (numpy.ndarray, optional): 真值，提供时记录 NMSE 代理值

    Returns:
        tuple: (ĥ, GampTrace)

    Raises:
        ValueError: 维度不匹配或参数非法
        GampDivergenceError: 迭代发散
    """
    state, trace = _run_gamp(w_real, y_sign, prior, noise_var_real, T, _one_bit_output, _one_bit_cost,
                             damping=damping, tol=tol, adaptive=adaptive, h_true=h_true)
    return state.h_hat, trace


def awgn_gamp(w_real, y_values, prior, noise_var_real, T, damping=1.0, tol=1e-6, adaptive=True,
              h_true=None):
    """AWGN 输出 GAMP 基线

    与一比特 GAMP 相同的递推，但输出端采用加性高斯噪声闭式解：
    ŝ = (y − p̂)/(v_p + σ²)，v_s = 1/(v_p + σ²)。参数与返回值同 one_bit_gamp。

    Returns:
        tuple: (ĥ, GampTrace)
    """
    state, trace = _run_gamp(w_real, y_values, prior, noise_var_real, T, _awgn_output, _awgn_cost,
                             damping=damping, tol=tol, adaptive=adaptive, h_true=h_true)
    return state.h_hat, trace


LS_SPECTRAL_FLOOR = 1e-6


def ls_estimate(w_complex, r_unquantized):
    """无量化观测下的最小范数最小二乘估计

    通过奇异值分解求解；σ² ≤ 10⁻⁶·σ²_max 的奇异方向被舍弃。

    Args:
        w_complex (numpy.ndarray): 复测量矩阵 W̃
        r_unquantized (numpy.ndarray): 含噪未量化观测

    Returns:
        numpy.ndarray: 角度域信道向量估计
    """
    if w_complex.shape[0] != r_unquantized.shape[0]:
        raise ValueError(f"观测长度与测量矩阵行数不一致: {r_unquantized.shape} vs {w_complex.shape}")

    u, sv, vh = np.linalg.svd(w_complex, full_matrices=False)
    if sv.size == 0 or sv[0] == 0:
        return np.zeros(w_complex.shape[1], dtype=complex)
    keep = sv ** 2 > LS_SPECTRAL_FLOOR * sv[0] ** 2
    coeffs = (u[:, keep].conj().T @ r_unquantized) / sv[keep]
    return vh[keep].conj().T @ coeffs


def _check_pair(h_true, h_est):
    h_true = np.asarray(h_true)
    h_est = np.asarray(h_est)
    if h_true.shape != h_est.shape:
        raise ValueError(f"真值与估计的形状不一致: {h_true.shape} vs {h_est.shape}")
    energy = np.linalg.norm(h_true) ** 2
    if energy == 0:
        raise ValueError("真实信道范数为零，NMSE 无定义")
    return h_true, h_est, energy


def nmse(h_true, h_est):
    """单次实现的归一化均方误差 ‖H − Ĥ‖_F² / ‖H‖_F²"""
    h_true, h_est, energy = _check_pair(h_true, h_est)
    return float(np.linalg.norm(h_true - h_est) ** 2 / energy)


def scaled_nmse(h_true, h_est):
    """允许一个最优复标量缩放后的 NMSE：min_c ‖H − cĤ‖_F² / ‖H‖_F²"""
    h_true, h_est, energy = _check_pair(h_true, h_est)
    est_energy = np.linalg.norm(h_est) ** 2
    if est_energy == 0:
        return 1.0
    c = np.vdot(h_est, h_true) / est_energy
    return float(np.linalg.norm(h_true - c * h_est) ** 2 / energy)
