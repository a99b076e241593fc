"""
通用文件处理逻辑

该模块提供仿真结果的落盘功能，
包括 NMSE 报告 CSV、求解器诊断 CSV、测量模型二进制转储以及输出文件名生成。
"""
import csv
import datetime
from pathlib import Path

import numpy as np


class FileHandler:
    """文件处理器，负责结果文件的写入与读取"""

    # NMSE 报告的表头（列顺序固定）
    REPORT_HEADER = ["axis", "value", "algorithm", "mean_nmse", "median_nmse",
                     "stderr", "trials", "seed_lo", "seed_hi"]

    # 二进制转储头部：rows, cols, y_len, h_len（小端 int64）
    DUMP_HEADER_DTYPE = np.dtype("<i8")
    DUMP_DATA_DTYPE = np.dtype("<f8")

    @staticmethod
    def _prepare_path(path):
        """确保输出文件所在目录存在"""
        path_obj = Path(path)
        if path_obj.parent and not path_obj.parent.exists():
            path_obj.parent.mkdir(parents=True, exist_ok=True)
        return path_obj

    @staticmethod
    def format_stat(value):
        """统计量格式化为 13 位有效数字的十进制科学计数法"""
        return f"{value:.12e}"

    @staticmethod
    def format_axis_value(value):
        return f"{value:.12g}"

    @staticmethod
    def write_report_csv(rows, path):
        """
        写入 NMSE 报告

        Args:
            rows (list): 每项为 (axis, value, algorithm, mean, median, stderr, trials, seed_lo, seed_hi)
            path (str | Path): 输出 CSV 路径

        Raises:
            OSError: 文件无法写入时抛出，消息中包含路径
        """
        try:
            path_obj = FileHandler._prepare_path(path)
            with open(path_obj, "w", encoding="utf-8", newline="") as file:
                writer = csv.writer(file, lineterminator="\n")
                writer.writerow(FileHandler.REPORT_HEADER)
                for axis, value, algorithm, mean, median, stderr, trials, seed_lo, seed_hi in rows:
                    writer.writerow([
                        axis,
                        FileHandler.format_axis_value(value),
                        algorithm,
                        FileHandler.format_stat(mean),
                        FileHandler.format_stat(median),
                        FileHandler.format_stat(stderr),
                        int(trials),
                        int(seed_lo),
                        int(seed_hi),
                    ])
        except OSError as exc:
            raise OSError(f"无法写入报告文件: {path} ({exc})") from exc

    @staticmethod
    def write_trace_csv(trace, path):
        """写入 GAMP 逐次迭代诊断信息

        Args:
            trace (GampTrace): 求解器诊断
            path (str | Path): 输出 CSV 路径
        """
        try:
            path_obj = FileHandler._prepare_path(path)
            with open(path_obj, "w", encoding="utf-8", newline="") as file:
                writer = csv.writer(file, lineterminator="\n")
                writer.writerow(trace.CSV_HEADER)
                for iteration, *stats in trace.rows:
                    writer.writerow([iteration] + [FileHandler.format_stat(value) for value in stats])
        except OSError as exc:
            raise OSError(f"无法写入诊断文件: {path} ({exc})") from exc

    @staticmethod
    def write_ensemble_dump(ensemble, path):
        """
        写入测量模型的二进制转储，供跨实现对比测试

        格式：4 个小端 int64（rows, cols, y_len, h_len），
        随后依次为行优先的 w_real、y_sign、h_v_real（小端 float64）。

        Args:
            ensemble (MeasurementEnsemble): 测量模型
            path (str | Path): 输出文件路径
        """
        w_real = np.ascontiguousarray(ensemble.w_real, dtype=FileHandler.DUMP_DATA_DTYPE)
        y_sign = np.asarray(ensemble.y_sign, dtype=FileHandler.DUMP_DATA_DTYPE)
        h_v_real = np.asarray(ensemble.h_v_real, dtype=FileHandler.DUMP_DATA_DTYPE)
        header = np.array([w_real.shape[0], w_real.shape[1], y_sign.size, h_v_real.size],
                          dtype=FileHandler.DUMP_HEADER_DTYPE)
        try:
            path_obj = FileHandler._prepare_path(path)
            with open(path_obj, "wb") as file:
                file.write(header.tobytes())
                file.write(w_real.tobytes(order="C"))
                file.write(y_sign.tobytes())
                file.write(h_v_real.tobytes())
        except OSError as exc:
            raise OSError(f"无法写入转储文件: {path} ({exc})") from exc

    @staticmethod
    def read_ensemble_dump(path):
        """
        读取二进制转储

        Returns:
            tuple: (w_real, y_sign, h_v_real)

        Raises:
            FileNotFoundError: 文件不存在
            ValueError: 文件长度与头部声明不一致
        """
        path_obj = Path(path)
        if not path_obj.exists():
            raise FileNotFoundError(f"转储文件不存在: {path}")

        raw = path_obj.read_bytes()
        head_size = 4 * FileHandler.DUMP_HEADER_DTYPE.itemsize
        rows, cols, y_len, h_len = (int(v) for v in np.frombuffer(raw[:head_size], dtype=FileHandler.DUMP_HEADER_DTYPE))
        data = np.frombuffer(raw[head_size:], dtype=FileHandler.DUMP_DATA_DTYPE)
        expected = rows * cols + y_len + h_len
        if data.size != expected:
            raise ValueError(f"转储文件长度不一致: 期望 {expected} 个数, 实际 {data.size}")

        w_real = data[:rows * cols].reshape(rows, cols)
        y_sign = data[rows * cols:rows * cols + y_len]
        h_v_real = data[rows * cols + y_len:]
        return w_real.copy(), y_sign.copy(), h_v_real.copy()

    @staticmethod
    def generate_report_filename(axis, output_dir=None):
        """
        生成报告文件名

        格式为：nmse_{扫描轴}_{时间戳}.csv

        Args:
            axis (str): 扫描轴名称
            output_dir (str, optional): 输出目录，默认为当前目录

        Returns:
            str: 报告文件的完整路径
        """
        timestamp = datetime.datetime.now().strftime("%Y%m%d_%H%M%S")
        output_path = Path(output_dir) if output_dir else Path(".")
        output_path.mkdir(parents=True, exist_ok=True)
        return str(output_path / f"nmse_{axis}_{timestamp}.csv")
