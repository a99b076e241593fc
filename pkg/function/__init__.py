"""
功能模块 - 一比特 ADC 毫米波信道估计仿真

该模块包含了仿真工具的核心功能实现，
包括几何信道模型、混合波束成形测量模型、GAMP 估计算法、蒙特卡洛基准测试和结果文件处理等功能。
"""

# 导入所有功能模块
from .config import ConfigManager
from .file_handler import FileHandler
from .channel_model import GridMode, SystemConfig, ChannelRealization, PathSet
from .measurement import FrameHardware, MeasurementEnsemble
from .denoisers import SparsePrior
from .gamp_solvers import GampDivergenceError, GampState, GampTrace
from .bench_harness import (Algorithm, BenchHarness, NmseReport, SweepAxis, SweepSpec,
                            TrialFailedError)

__all__ = [
    'ConfigManager',
    'FileHandler',
    'GridMode',
    'SystemConfig',
    'ChannelRealization',
    'PathSet',
    'FrameHardware',
    'MeasurementEnsemble',
    'SparsePrior',
    'GampDivergenceError',
    'GampState',
    'GampTrace',
    'Algorithm',
    'BenchHarness',
    'NmseReport',
    'SweepAxis',
    'SweepSpec',
    'TrialFailedError',
]
