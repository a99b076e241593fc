"""
配置管理模块

该模块负责处理仿真场景的配置读取和保存功能，
包括系统参数、求解器参数以及扫描实验默认值的持久化存储。
"""
import configparser
import sys
from pathlib import Path

from .channel_model import GridMode, SystemConfig

SECTION = "SystemConfig"
SWEEP_SECTION = "Sweep"


def parse_bool(text):
    """按 configparser 的约定解析布尔值（yes/no、true/false、on/off、1/0）"""
    key = str(text).strip().lower()
    if key not in configparser.ConfigParser.BOOLEAN_STATES:
        raise ValueError(f"不是布尔值: {text}")
    return configparser.ConfigParser.BOOLEAN_STATES[key]


# 字段顺序即写入顺序
FIELD_TYPES = {
    "n_tx": int,
    "n_rx": int,
    "l_tx": int,
    "l_rx": int,
    "n_streams": int,
    "n_paths": int,
    "n_frames": int,
    "snr_db": float,
    "noise_var": float,
    "gamp_iters": int,
    "rng_seed": int,
    "grid_mode": GridMode.parse,
    "path_gain_var": float,
    "gamp_damping": float,
    "gamp_tol": float,
    "gamp_adaptive": parse_bool,
}

SWEEP_DEFAULTS = {
    "trials": "200",
    "seed": "0",
    "workers": "1",
    "algorithms": "onebit,awgn,ls",
}


class ConfigManager:
    """配置管理器类

    该类负责管理场景配置文件，提供配置的读取和保存功能。
    配置文件可以是带 [SystemConfig] 节的 INI 文件，也可以是不带节头的扁平键值文件。
    """

    def __init__(self, config_path=None, must_exist=True):
        """初始化配置管理器

        Args:
            config_path (str, optional): 配置文件路径；为空时使用项目根目录下的 estimate.ini，
                不存在则自动创建默认配置
            must_exist (bool, optional): 显式路径是否必须已存在，写入新配置时传 False

        Raises:
            FileNotFoundError: 显式指定的配置文件不存在
        """
        if config_path is None:
            if hasattr(sys, '_MEIPASS'):
                # 打包后环境：使用可执行文件所在目录
                self.config_path = Path(sys.executable).parent / "estimate.ini"
            else:
                self.config_path = Path(__file__).resolve().parents[1] / "estimate.ini"
            self._ensure_config_exists()
        else:
            self.config_path = Path(config_path)
            if must_exist and not self.config_path.exists():
                raise FileNotFoundError(f"配置文件不存在: {config_path}")

        self.config = configparser.ConfigParser()

    def _ensure_config_exists(self):
        """确保默认配置文件存在"""
        if not self.config_path.exists():
            self.save_config(SystemConfig())

    def _load(self):
        """读取配置文件，扁平键值文件视为 [SystemConfig] 节"""
        text = self.config_path.read_text(encoding="utf-8")
        parser = configparser.ConfigParser()
        try:
            parser.read_string(text, source=str(self.config_path))
        except configparser.MissingSectionHeaderError:
            parser.read_string(f"[{SECTION}]\n{text}", source=str(self.config_path))
        return parser

    def read_config(self):
        """读取系统配置

        Returns:
            SystemConfig: 校验通过的场景参数；文件中缺失的字段取默认值

        Raises:
            ValueError: 出现未知字段、字段值无法解析或参数约束不满足
        """
        self.config = self._load()
        if not self.config.has_section(SECTION):
            return SystemConfig()

        values = {}
        for key, raw in self.config.items(SECTION):
            if key not in FIELD_TYPES:
                raise ValueError(f"未知的配置项: {key}")
            try:
                values[key] = FIELD_TYPES[key](raw.strip())
            except ValueError as exc:
                raise ValueError(f"配置项 {key} 的值无法解析: {raw!r}") from exc
        return SystemConfig(**values)

    def read_sweep_defaults(self):
        """读取 [Sweep] 节中的扫描默认值

        Returns:
            dict: trials / seed / workers（int）与 algorithms（list[str]）
        """
        self.config = self._load()
        section = dict(SWEEP_DEFAULTS)
        if self.config.has_section(SWEEP_SECTION):
            section.update(dict(self.config.items(SWEEP_SECTION)))
        try:
            return {
                "trials": int(section["trials"]),
                "seed": int(section["seed"]),
                "workers": int(section["workers"]),
                "algorithms": [a.strip() for a in section["algorithms"].split(",") if a.strip()],
            }
        except (KeyError, ValueError) as exc:
            raise ValueError(f"[Sweep] 节的值无法解析: {exc}") from exc

    def save_config(self, cfg, sweep_defaults=None):
        """保存配置

        Args:
            cfg (SystemConfig): 场景参数
            sweep_defaults (dict, optional): 写入 [Sweep] 节的默认值
        """
        config = configparser.ConfigParser()
        entries = {}
        for key in FIELD_TYPES:
            value = getattr(cfg, key)
            entries[key] = value.value if isinstance(value, GridMode) else str(value).lower() if isinstance(value, bool) else str(value)
        config[SECTION] = entries

        sweep = dict(SWEEP_DEFAULTS)
        if sweep_defaults:
            for key, value in sweep_defaults.items():
                sweep[key] = ",".join(value) if isinstance(value, (list, tuple)) else str(value)
        config[SWEEP_SECTION] = sweep

        self.config_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.config_path, "w", encoding="utf-8") as config_file:
            config.write(config_file)
        self.config = config
