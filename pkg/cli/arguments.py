"""
命令行参数

该模块构建各子命令的参数解析器，并负责把文本参数
（扫描值列表、算法列表、64 位种子）转换为校验过的数值。
"""
import argparse
import re

from function.bench_harness import Algorithm, SweepAxis

U64_MAX = 2 ** 64 - 1
# 以负号开头的数值，argparse 会把它误认作选项
_NEGATIVE_NUMBER = re.compile(r"^-\.?\d")


def parse_seed(text):
    """解析 64 位无符号整数种子"""
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"无效的种子: {text}")
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f"种子超出 64 位无符号整数范围: {text}")
    return value


def parse_positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"不是整数: {text}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"必须为正整数: {text}")
    return value


def parse_axis(text):
    try:
        return SweepAxis.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def parse_algorithms(text):
    """解析逗号分隔的算法列表，例如 onebit,awgn,ls"""
    names = [name for name in text.split(",") if name.strip()]
    if not names:
        raise argparse.ArgumentTypeError("算法列表不能为空")
    try:
        return [Algorithm.parse(name) for name in names]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def parse_values(axis, text):
    """
    按扫描轴解析逗号分隔的扫描值

    SNR 轴取实数，帧数与 RF 链数轴取正整数。

    Args:
        axis (SweepAxis): 扫描轴
        text (str): 如 "-20,-10,0"

    Returns:
        list: 扫描值列表

    Raises:
        ValueError: 值无法解析或不满足正整数要求
    """
    items = [item.strip() for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError("扫描值列表不能为空")
    if axis is SweepAxis.SNR_DB:
        return [float(item) for item in items]

    values = [int(item) for item in items]
    if any(v < 1 for v in values):
        raise ValueError(f"{axis.value} 轴的扫描值必须为正整数: {text}")
    return values


def join_value_lists(argv):
    """
    把 "--values -20,-10" 改写为 "--values=-20,-10"

    argparse 只在解析器没有形如负数的选项时才接受负数参数，
    逗号分隔的负数列表会被当成未知选项，这里预先把它与选项名拼接。

    Args:
        argv (list): 原始命令行参数

    Returns:
        list: 改写后的参数列表
    """
    joined = []
    items = iter(argv)
    for item in items:
        if item == "--values":
            value = next(items, None)
            if value is not None and _NEGATIVE_NUMBER.match(value):
                joined.append(f"--values={value}")
                continue
            joined.append(item)
            if value is not None:
                joined.append(value)
            continue
        joined.append(item)
    return joined


def build_parser():
    """构建 estimate 命令的参数解析器"""
    parser = argparse.ArgumentParser(
        prog="estimate",
        description="一比特 ADC 混合波束成形毫米波信道估计仿真",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="输出调试日志")
    parser.add_argument("-q", "--quiet", action="store_true", help="不显示进度条")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="沿一个参数轴扫描并输出 NMSE 报告 CSV")
    sweep.add_argument("--config", help="配置文件（INI 或扁平键值文件）")
    sweep.add_argument("--axis", type=parse_axis, required=True, help="snr | frames | rfchains")
    sweep.add_argument("--values", help="逗号分隔的扫描值，如 -20,-10,0；缺省时使用默认网格")
    sweep.add_argument("--algorithms", type=parse_algorithms, help="逗号分隔: onebit,awgn,ls")
    sweep.add_argument("--trials", type=parse_positive_int, help="每个扫描点的试验次数")
    sweep.add_argument("--seed", type=parse_seed, help="起始试验种子")
    sweep.add_argument("--workers", type=parse_positive_int, help="并行线程数")
    sweep.add_argument("--out", help="输出 CSV 路径，缺省时自动生成")

    trial = sub.add_parser("trial", help="运行单次试验并打印各算法的 NMSE")
    trial.add_argument("--config", help="配置文件（INI 或扁平键值文件）")
    trial.add_argument("--seed", type=parse_seed, required=True, help="试验种子")
    trial.add_argument("--algorithms", type=parse_algorithms, help="逗号分隔: onebit,awgn,ls")
    trial.add_argument("--trace", help="把一比特 GAMP 的逐次迭代诊断写入该 CSV")

    support = sub.add_parser("support", help="打印一次信道实现在角度域中的支撑集大小")
    support.add_argument("--config", help="配置文件（INI 或扁平键值文件）")
    support.add_argument("--seed", type=parse_seed, required=True, help="试验种子")
    support.add_argument("--tol", type=float, default=1e-9, help="幅度阈值，默认 1e-9")

    dump = sub.add_parser("dump", help="写出测量模型的二进制转储")
    dump.add_argument("--config", help="配置文件（INI 或扁平键值文件）")
    dump.add_argument("--seed", type=parse_seed, required=True, help="试验种子")
    dump.add_argument("--out", required=True, help="输出文件路径")

    init = sub.add_parser("init-config", help="写出默认配置文件")
    init.add_argument("--out", required=True, help="输出 INI 路径")

    return parser
