"""
几何信道模型

该模块负责生成窄带毫米波 MIMO 几何信道，
并在天线域与角度域（虚拟信道表示）之间进行转换，
同时控制离开角/到达角是否对齐 DFT 网格（是否包含泄漏效应）。
"""
import logging
from dataclasses import dataclass, field, replace as dc_replace
from enum import Enum

import numpy as np
from scipy.linalg import dft

logger = logging.getLogger(__name__)


class GridMode(Enum):
    """角度放置方式"""

    ON_GRID = "OnGrid"
    OFF_GRID = "OffGrid"

    @classmethod
    def parse(cls, text):
        """从配置文本解析网格模式

        Args:
            text (str | GridMode): 'on' / 'off' / 'OnGrid' / 'OffGrid'（不区分大小写）

        Returns:
            GridMode: 对应的枚举值

        Raises:
            ValueError: 无法识别的网格模式
        """
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        if key in ("on", "ongrid", "on_grid"):
            return cls.ON_GRID
        if key in ("off", "offgrid", "off_grid"):
            return cls.OFF_GRID
        raise ValueError(f"无法识别的网格模式: {text}")


@dataclass(frozen=True)
class SystemConfig:
    """仿真场景参数

    字段与系统模型中的符号一一对应：
    n_tx=N_t, n_rx=N_r, l_tx=L_t, l_rx=L_r, n_streams=N_s, n_paths=N_p,
    n_frames=M, snr_db=10log10(ρ/σ_n²), noise_var=σ_n², gamp_iters=T, path_gain_var=σ_α²。
    gamp_damping 为 GAMP 的步长上限，gamp_adaptive 控制是否按代价自适应调整步长。
    """

    n_tx: int = 64
    n_rx: int = 16
    l_tx: int = 4
    l_rx: int = 4
    n_streams: int = 2
    n_paths: int = 2
    n_frames: int = 64
    snr_db: float = 0.0
    noise_var: float = 1.0
    gamp_iters: int = 50
    rng_seed: int = 0
    grid_mode: GridMode = GridMode.OFF_GRID
    path_gain_var: float = 1.0
    gamp_damping: float = 1.0
    gamp_tol: float = 1e-6
    gamp_adaptive: bool = True

    def __post_init__(self):
        # 允许以字符串形式传入网格模式
        object.__setattr__(self, "grid_mode", GridMode.parse(self.grid_mode))
        self.validate()

    def validate(self):
        """校验参数之间的约束关系

        Raises:
            ValueError: 任一约束不满足时抛出，消息中指明具体规则
        """
        counts = {
            "n_tx": self.n_tx, "n_rx": self.n_rx, "l_tx": self.l_tx, "l_rx": self.l_rx,
            "n_streams": self.n_streams, "n_paths": self.n_paths,
            "n_frames": self.n_frames, "gamp_iters": self.gamp_iters,
        }
        for name, value in counts.items():
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
                raise ValueError(f"{name} 必须是正整数: {value}")

        if self.l_tx > self.n_tx:
            raise ValueError(f"发射 RF 链数不能超过发射天线数: l_tx={self.l_tx} > n_tx={self.n_tx}")
        if self.l_rx > self.n_rx:
            raise ValueError(f"接收 RF 链数不能超过接收天线数: l_rx={self.l_rx} > n_rx={self.n_rx}")
        if self.n_streams > min(self.l_tx, self.l_rx):
            raise ValueError(
                f"数据流数必须满足 n_streams ≤ min(l_tx, l_rx): "
                f"{self.n_streams} > min({self.l_tx}, {self.l_rx})"
            )
        if not self.noise_var > 0:
            raise ValueError(f"噪声方差必须为正: {self.noise_var}")
        if not self.path_gain_var > 0:
            raise ValueError(f"路径增益方差必须为正: {self.path_gain_var}")
        if not np.isfinite(self.snr_db):
            raise ValueError(f"SNR 必须是有限实数: {self.snr_db}")
        if not 0 <= int(self.rng_seed) < 2 ** 64:
            raise ValueError(f"随机种子必须是 64 位无符号整数: {self.rng_seed}")
        if not 0.1 <= self.gamp_damping <= 1.0:
            raise ValueError(f"阻尼系数必须位于 [0.1, 1]: {self.gamp_damping}")
        if not self.gamp_tol > 0:
            raise ValueError(f"提前停止阈值必须为正: {self.gamp_tol}")
        if not isinstance(self.gamp_adaptive, (bool, np.bool_)):
            raise ValueError(f"自适应步长开关必须是布尔值: {self.gamp_adaptive!r}")
        if self.grid_mode is GridMode.ON_GRID and self.n_paths > min(self.n_tx, self.n_rx):
            raise ValueError(
                f"网格对齐模式下路径数不能超过 min(n_tx, n_rx): {self.n_paths}"
            )

    def replace(self, **changes):
        """返回修改了部分字段的新配置（会重新校验）"""
        return dc_replace(self, **changes)

    @property
    def rho(self):
        """平均接收功率 ρ = σ_n² · 10^(snr_db/10)"""
        return self.noise_var * 10.0 ** (self.snr_db / 10.0)


@dataclass(frozen=True)
class PathSet:
    """传播路径参数：离开角、到达角（弧度）与复增益"""

    aod: np.ndarray
    aoa: np.ndarray
    gains: np.ndarray

    def __post_init__(self):
        if not len(self.aod) == len(self.aoa) == len(self.gains):
            raise ValueError(
                f"路径参数长度不一致: aod={len(self.aod)}, aoa={len(self.aoa)}, gains={len(self.gains)}"
            )

    @property
    def n_paths(self):
        return len(self.gains)


@dataclass(frozen=True)
class ChannelRealization:
    """一次信道实现：天线域矩阵 h、角度域矩阵 h_virtual 及生成它们的路径"""

    h: np.ndarray
    h_virtual: np.ndarray
    paths: PathSet = field(repr=False)


def make_rng(seed):
    """根据种子创建确定性的随机数发生器"""
    return np.random.default_rng(int(seed))


def spawn_streams(seed, count):
    """由一个试验种子派生出若干相互独立的随机数流

    用于让信道、硬件和噪声各自使用独立的随机流，
    从而保证同一试验中所有算法面对完全相同的数据。

    Args:
        seed (int): 试验种子
        count (int): 需要的随机流个数

    Returns:
        list[numpy.random.Generator]: 独立的随机数发生器列表
    """
    children = np.random.SeedSequence(int(seed)).spawn(count)
    return [np.random.default_rng(child) for child in children]


def array_response(theta, n):
    """均匀线阵（半波长间距）的阵列响应向量

    返回 (1/√n)·[1, e^{jπ sinθ}, …, e^{j(n−1)π sinθ}]，欧氏范数为 1。

    Args:
        theta (float): 角度（弧度），任意实数
        n (int): 阵元数

    Returns:
        numpy.ndarray: 长度为 n 的复向量
    """
    if n < 1:
        raise ValueError(f"阵元数必须为正整数: {n}")
    phase = np.pi * np.sin(theta) * np.arange(n)
    return np.exp(1j * phase) / np.sqrt(n)


def dft_matrix(n):
    """归一化的 n 点酉 DFT 矩阵

    第 k 列等于 sinθ = 2k/n 处的阵列响应，因此网格对齐的路径
    在角度域中恰好落在单个格点上。
    """
    return dft(n, scale="sqrtn").conj()


def to_virtual(h):
    """天线域 → 角度域：H_v = U_r^H · H · U_t"""
    n_rx, n_tx = h.shape
    return dft_matrix(n_rx).conj().T @ h @ dft_matrix(n_tx)


def from_virtual(h_virtual):
    """角度域 → 天线域：H = U_r · H_v · U_t^H"""
    n_rx, n_tx = h_virtual.shape
    return dft_matrix(n_rx) @ h_virtual @ dft_matrix(n_tx).conj().T


def _grid_angles(n, count, rng):
    # 不放回地抽取 DFT 格点，sinθ = 2k/n 折叠到 [-1, 1)
    bins = rng.choice(n, size=count, replace=False)
    spatial = 2.0 * bins / n
    spatial = np.where(spatial >= 1.0, spatial - 2.0, spatial)
    return np.mod(np.arcsin(spatial), 2 * np.pi)


def generate_paths(cfg, rng):
    """随机生成 N_p 条路径的角度和增益

    OffGrid 模式下角度在 [0, 2π) 上均匀分布；
    OnGrid 模式下先在 {0, …, n−1} 中不放回地抽取格点序号，
    再令 θ = arcsin(2k/n)（映射到 [0, 2π)），使阵列响应恰好等于 DFT 列。
    路径增益服从 CN(0, σ_α²)。

    Args:
        cfg (SystemConfig): 场景参数
        rng (numpy.random.Generator): 确定性随机数发生器

    Returns:
        PathSet: 路径参数
    """
    n_paths = cfg.n_paths
    if cfg.grid_mode is GridMode.ON_GRID:
        aod = _grid_angles(cfg.n_tx, n_paths, rng)
        aoa = _grid_angles(cfg.n_rx, n_paths, rng)
    else:
        aod = rng.uniform(0.0, 2 * np.pi, n_paths)
        aoa = rng.uniform(0.0, 2 * np.pi, n_paths)

    scale = np.sqrt(cfg.path_gain_var / 2.0)
    gains = scale * (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths))
    return PathSet(aod=aod, aoa=aoa, gains=gains)


def assemble_channel(cfg, paths):
    """由路径参数合成信道矩阵

    H = √(N_r N_t / N_p) · Σ_l α_l a_r(θ_rl) a_t^H(θ_tl)，
    σ_α² = 1 时 E[‖H‖_F²] = N_t N_r。

    Args:
        cfg (SystemConfig): 场景参数
        paths (PathSet): 路径参数

    Returns:
        ChannelRealization: 天线域与角度域信道
    """
    if paths.n_paths != cfg.n_paths:
        raise ValueError(f"路径数与配置不一致: {paths.n_paths} != {cfg.n_paths}")

    h = np.zeros((cfg.n_rx, cfg.n_tx), dtype=complex)
    for aod, aoa, gain in zip(paths.aod, paths.aoa, paths.gains):
        a_r = array_response(aoa, cfg.n_rx)
        a_t = array_response(aod, cfg.n_tx)
        h += gain * np.outer(a_r, a_t.conj())
    h *= np.sqrt(cfg.n_rx * cfg.n_tx / cfg.n_paths)

    return ChannelRealization(h=h, h_virtual=to_virtual(h), paths=paths)


def generate_channel(cfg, rng):
    """生成路径并合成一次信道实现"""
    return assemble_channel(cfg, generate_paths(cfg, rng))


def virtual_support_size(h_virtual, tol):
    """统计角度域中幅度大于 tol 的元素个数

    Args:
        h_virtual (numpy.ndarray): 角度域信道矩阵
        tol (float): 正阈值

    Returns:
        int: 支撑集大小
    """
    if not tol > 0:
        raise ValueError(f"阈值必须为正: {tol}")
    return int(np.count_nonzero(np.abs(h_virtual) > tol))
