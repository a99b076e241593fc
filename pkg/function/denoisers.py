"""
标量去噪器

该模块实现 GAMP 所需的两类标量后验矩计算：
输出端的截断高斯矩（一比特观测）和输入端的 Bernoulli-Gaussian 先验去噪器。
另提供去噪后验相对先验的 KL 散度，供 GAMP 的自适应步长使用。
所有函数均支持逐元素的向量化输入。
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcx, expit

_SQRT2 = np.sqrt(2.0)
_SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)
_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class SparsePrior:
    """每个实系数独立的 Bernoulli-Gaussian 先验

    以概率 sparsity 取自 N(mean, active_var)，否则为 0。
    """

    sparsity: float
    active_var: float
    mean: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.sparsity <= 1.0:
            raise ValueError(f"稀疏度必须位于 (0, 1]: {self.sparsity}")
        if not self.active_var > 0:
            raise ValueError(f"激活分量方差必须为正: {self.active_var}")

    @classmethod
    def from_config(cls, cfg):
        """按信道统计量设置先验参数

        sparsity = N_p/(N_t N_r)，active_var = σ_α² N_t N_r/(2 N_p)，
        使 E[‖h_v‖²] = σ_α² N_t N_r 平均分配到实部和虚部。
        """
        size = cfg.n_tx * cfg.n_rx
        return cls(
            sparsity=min(1.0, cfg.n_paths / size),
            active_var=cfg.path_gain_var * size / (2.0 * cfg.n_paths),
        )

    @property
    def prior_mean(self):
        return self.sparsity * self.mean

    @property
    def prior_var(self):
        return self.sparsity * (self.active_var + self.mean ** 2) - self.prior_mean ** 2


def inverse_mills_ratio(z):
    """φ(z)/Φ(z)，借助缩放互补误差函数在整个实轴上稳定计算"""
    return _SQRT_2_OVER_PI / erfcx(-np.asarray(z, dtype=float) / _SQRT2)


def truncated_gaussian_moments(sign, mean, var):
    """截断高斯分布的均值和方差

    对 r ~ N(mean, var)，sign = +1 时截断到 {r > 0}，
    sign = −1 时截断到 {r < 0}。令 z = sign·mean/√var，λ = φ(z)/Φ(z)，则
    E = mean + sign·√var·λ，Var = var·(1 − λ(λ + z))。

    Args:
        sign (float | numpy.ndarray): ±1
        mean (float | numpy.ndarray): 未截断均值
        var (float | numpy.ndarray): 未截断方差，必须为正

    Returns:
        tuple: (截断均值, 截断方差)

    Raises:
        ValueError: 方差非正或符号不是 ±1
    """
    sign = np.asarray(sign, dtype=float)
    mean = np.asarray(mean, dtype=float)
    var = np.asarray(var, dtype=float)
    if np.any(~(var > 0)):
        raise ValueError("截断高斯的方差必须为正")
    if np.any(np.abs(sign) != 1.0):
        raise ValueError("符号观测只能取 ±1")

    std = np.sqrt(var)
    z = sign * mean / std
    lam = inverse_mills_ratio(z)
    t_mean = mean + sign * std * lam
    shrink = np.clip(1.0 - lam * (lam + z), np.finfo(float).tiny, 1.0)
    return t_mean, var * shrink


def _log_normal_pdf(x, mean, var):
    return -0.5 * (_LOG_2PI + np.log(var) + (x - mean) ** 2 / var)


def prior_denoiser(r_hat, v_r, prior):
    """Bernoulli-Gaussian 先验在高斯似然下的后验均值与方差

    似然为 r̂ = h + N(0, v_r)。激活分量的后验为高斯闭式解，
    激活后验概率在对数域计算后经 logistic 函数得到。

    Args:
        r_hat (float | numpy.ndarray): 似然均值
        v_r (float | numpy.ndarray): 似然方差，必须为正
        prior (SparsePrior): 先验参数

    Returns:
        tuple: (后验均值, 后验方差)
    """
    r_hat = np.asarray(r_hat, dtype=float)
    v_r = np.asarray(v_r, dtype=float)
    if np.any(~(v_r > 0)):
        raise ValueError("去噪器输入方差必须为正")

    var_x = prior.active_var
    active_mean = (var_x * r_hat + v_r * prior.mean) / (var_x + v_r)
    active_var = var_x * v_r / (var_x + v_r)

    with np.errstate(divide="ignore"):
        log_odds = (
            np.log(prior.sparsity) - np.log1p(-prior.sparsity)
            + _log_normal_pdf(r_hat, prior.mean, var_x + v_r)
            - _log_normal_pdf(r_hat, 0.0, v_r)
        )
    weight = expit(log_odds)

    post_mean = weight * active_mean
    post_var = weight * active_var + weight * (1.0 - weight) * active_mean ** 2
    return post_mean, post_var


def _log_evidence(r_hat, v_r, prior):
    # log Z，Z = (1−λ)N(r̂; 0, v_r) + λN(r̂; μ, σ_x² + v_r)
    with np.errstate(divide="ignore"):
        return np.logaddexp(
            np.log1p(-prior.sparsity) + _log_normal_pdf(r_hat, 0.0, v_r),
            np.log(prior.sparsity) + _log_normal_pdf(r_hat, prior.mean, prior.active_var + v_r),
        )


def prior_divergence(r_hat, v_r, post_mean, post_var, prior):
    """后验 b(h) ∝ p(h)·N(h; r̂, v_r) 相对先验的 KL 散度 D(b‖p)，逐元素

    D(b‖p) = −log Z − ½log(2πv_r) − (v_h + (ĥ − r̂)²)/(2v_r)，
    其中 (ĥ, v_h) 为 prior_denoiser 对同一 (r̂, v_r) 给出的后验矩。
    """
    r_hat = np.asarray(r_hat, dtype=float)
    v_r = np.asarray(v_r, dtype=float)
    spread = post_var + (post_mean - r_hat) ** 2
    return -_log_evidence(r_hat, v_r, prior) - 0.5 * (_LOG_2PI + np.log(v_r)) - spread / (2.0 * v_r)
