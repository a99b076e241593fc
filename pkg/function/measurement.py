"""
混合波束成形测量模型

该模块构造每一帧的模拟/数字预编码器、模拟合并器和训练符号，
按向量化公式堆叠得到压缩感知测量矩阵（复数形式与实数提升形式），
并生成无噪声、含噪声以及一比特量化后的观测。
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard

from .channel_model import dft_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrameHardware:
    """单帧训练所用的硬件配置

    Attributes:
        f_rf: N_t × L_t 模拟预编码器（移相器网络）
        f_bb: L_t × N_s 数字预编码器
        w_rf: N_r × L_r 模拟合并器
        symbols: 长度 N_s 的训练符号
    """

    f_rf: np.ndarray
    f_bb: np.ndarray
    w_rf: np.ndarray
    symbols: np.ndarray

    @property
    def transmit_vector(self):
        """发射向量 x_m = F_RF F_BB s_m"""
        return self.f_rf @ self.f_bb @ self.symbols


@dataclass(frozen=True)
class MeasurementEnsemble:
    """堆叠后的测量模型及各类观测

    w_real 与 y_sign 供一比特 GAMP 使用，w_complex 与 r_complex 供
    无量化 LS 基线使用，h_v_real 为实数提升后的真实角度域信道。
    """

    frames: list
    phi: np.ndarray
    psi: np.ndarray
    w_complex: np.ndarray
    w_real: np.ndarray
    r_noiseless: np.ndarray
    r_noisy: np.ndarray
    y_sign: np.ndarray
    r_complex: np.ndarray
    h_v_real: np.ndarray
    rho: float
    noise_var_real: float

    @property
    def n_measurements(self):
        return self.w_real.shape[0]


def _phase_shifter_matrix(n_antennas, n_chains, rng):
    # 每个元素幅度为 1/√N，相位在 [0, 2π) 上独立均匀分布
    phases = rng.uniform(0.0, 2 * np.pi, size=(n_antennas, n_chains))
    return np.exp(1j * phases) / np.sqrt(n_antennas)


def training_symbols(n_streams, n_frames, m):
    """第 m 帧的训练符号

    取 K 阶 Hadamard 矩阵第 (m mod K) 列的前 N_s 个元素并除以 √N_s，
    其中 K 为不小于 max(N_s, M) 的最小 2 的幂。
    """
    order = 1 << (max(n_streams, n_frames) - 1).bit_length()
    column = hadamard(order)[:n_streams, m % order]
    return column.astype(complex) / np.sqrt(n_streams)


def generate_frame_hardware(cfg, rng, m):
    """随机生成第 m 帧的预编码器、合并器和训练符号

    F_RF 与 W_RF 的元素为随机相位、固定幅度；F_BB 为复高斯矩阵，
    并缩放使 ‖F_RF F_BB‖_F² = N_s。

    Args:
        cfg (SystemConfig): 场景参数
        rng (numpy.random.Generator): 硬件随机流
        m (int): 帧序号，0 ≤ m < M

    Returns:
        FrameHardware: 该帧的硬件配置

    Raises:
        ValueError: 帧序号越界
    """
    if not 0 <= m < cfg.n_frames:
        raise ValueError(f"帧序号越界: m={m}, M={cfg.n_frames}")

    f_rf = _phase_shifter_matrix(cfg.n_tx, cfg.l_tx, rng)
    # 基带预编码器按总发射功率 N_s 归一化
    f_bb = rng.standard_normal((cfg.l_tx, cfg.n_streams)) + 1j * rng.standard_normal((cfg.l_tx, cfg.n_streams))
    f_bb *= np.sqrt(cfg.n_streams) / np.linalg.norm(f_rf @ f_bb, "fro")
    w_rf = _phase_shifter_matrix(cfg.n_rx, cfg.l_rx, rng)

    return FrameHardware(
        f_rf=f_rf,
        f_bb=f_bb,
        w_rf=w_rf,
        symbols=training_symbols(cfg.n_streams, cfg.n_frames, m),
    )


def build_gamma(frame):
    """单帧的测量矩阵 Γ_m = s^T F_BB^T F_RF^T ⊗ W_RF^H

    Args:
        frame (FrameHardware): 该帧的硬件配置

    Returns:
        numpy.ndarray: L_r × (N_t·N_r) 复矩阵

    Raises:
        ValueError: 各矩阵维度不匹配
    """
    n_tx, l_tx = frame.f_rf.shape
    if frame.f_bb.shape[0] != l_tx:
        raise ValueError(f"F_BB 行数与 F_RF 列数不一致: {frame.f_bb.shape} vs {frame.f_rf.shape}")
    if frame.f_bb.shape[1] != frame.symbols.shape[0]:
        raise ValueError(f"F_BB 列数与符号长度不一致: {frame.f_bb.shape} vs {frame.symbols.shape}")

    # vec(W^H H x) = (x^T ⊗ W^H) vec(H)
    row = frame.transmit_vector.reshape(1, n_tx)
    return np.kron(row, frame.w_rf.conj().T)


def lift_matrix(a):
    """复矩阵的实数提升 [[Re A, −Im A], [Im A, Re A]]"""
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


def lift_vector(v):
    """复向量的实数提升 [Re v; Im v]"""
    return np.concatenate([v.real, v.imag])


def complexify(v_real):
    """实数提升的逆变换"""
    half = v_real.shape[0] // 2
    return v_real[:half] + 1j * v_real[half:]


def quantize_sign(v):
    """一比特量化：逐元素取符号，约定 sign(0) = +1"""
    return np.where(np.asarray(v) >= 0, 1.0, -1.0)


def effective_noise_var(cfg):
    """送入求解器的每个实分量噪声方差 σ_n²/2"""
    return cfg.noise_var / 2.0


def assemble_ensemble(cfg, frames, channel, rng):
    """堆叠 M 帧得到完整测量模型并生成观测

    y = Q(√ρ Φ Ψ h̃_v + ñ)，其中 Ψ = U_t* ⊗ U_r，ñ_m = W_RF,m^H n_m。

    Args:
        cfg (SystemConfig): 场景参数
        frames (list[FrameHardware]): M 帧硬件配置
        channel (ChannelRealization): 信道实现
        rng (numpy.random.Generator): 噪声随机流

    Returns:
        MeasurementEnsemble: 测量模型与观测
    """
    if len(frames) != cfg.n_frames:
        raise ValueError(f"帧数与配置不一致: {len(frames)} != {cfg.n_frames}")

    # 逐帧 Γ_m 纵向堆叠，观测顺序为帧优先
    phi = np.vstack([build_gamma(frame) for frame in frames])
    # H = U_r H_v U_t^H，故 vec(H) = (U_t* ⊗ U_r) vec(H_v)
    psi = np.kron(dft_matrix(cfg.n_tx).conj(), dft_matrix(cfg.n_rx))
    rho = cfg.rho
    w_complex = np.sqrt(rho) * (phi @ psi)

    # vec(·) 按列堆叠
    h_v_vec = channel.h_virtual.reshape(-1, order="F")

    # 噪声在合并器之前注入，经 W_RF^H 后进入观测
    noise_scale = np.sqrt(cfg.noise_var / 2.0)
    noise = []
    for frame in frames:
        n_m = noise_scale * (rng.standard_normal(cfg.n_rx) + 1j * rng.standard_normal(cfg.n_rx))
        noise.append(frame.w_rf.conj().T @ n_m)
    noise = np.concatenate(noise)

    r_clean = w_complex @ h_v_vec
    r_complex = r_clean + noise
    r_noisy = lift_vector(r_complex)

    logger.debug("测量模型: %d 个复观测, %d 个复未知量, ρ=%.4g", *w_complex.shape, rho)
    return MeasurementEnsemble(
        frames=list(frames),
        phi=phi,
        psi=psi,
        w_complex=w_complex,
        w_real=lift_matrix(w_complex),
        r_noiseless=lift_vector(r_clean),
        r_noisy=r_noisy,
        y_sign=quantize_sign(r_noisy),  # 实部与虚部分别量化
        r_complex=r_complex,
        h_v_real=lift_vector(h_v_vec),
        rho=rho,
        noise_var_real=effective_noise_var(cfg),
    )


def build_ensemble(cfg, channel, hardware_rng, noise_rng):
    """生成 M 帧硬件并组装测量模型"""
    frames = [generate_frame_hardware(cfg, hardware_rng, m) for m in range(cfg.n_frames)]
    return assemble_ensemble(cfg, frames, channel, noise_rng)
