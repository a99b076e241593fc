"""
命令行主程序

该模块实现了仿真工具的命令行入口，包括配置加载、
子命令分发、日志输出和退出码处理等功能。
"""
import logging
import sys
from pathlib import Path

# 添加项目根目录到系统路径
project_root = Path(__file__).resolve().parents[1]
if str(project_root) not in sys.path:
    sys.path.append(str(project_root))

from function.bench_harness import (DEFAULT_GRIDS, Algorithm, BenchHarness, SweepAxis, SweepSpec,
                                    check_monotonic, emit_report, run_trial, trace_trial)
from function.channel_model import SystemConfig, generate_channel, spawn_streams, virtual_support_size
from function.config import ConfigManager
from function.file_handler import FileHandler
from function.measurement import build_ensemble

from .arguments import build_parser, join_value_lists, parse_values

logger = logging.getLogger(__name__)

LOG_FORMAT = "[%(asctime)s] %(message)s"
LOG_DATEFMT = "%H:%M:%S"


class MainApplication:
    """主应用程序类

    该类解析命令行参数，加载配置并调用功能模块完成对应的子命令。
    """

    def __init__(self):
        """初始化主应用程序"""
        self.parser = build_parser()
        self.show_progress = True
        self._handler = None

    def setup_logging(self, verbose=False):
        """配置日志输出格式，与时间戳日志条目保持一致

        Args:
            verbose (bool): 是否输出调试级别日志
        """
        level = logging.DEBUG if verbose else logging.INFO
        if self._handler is None:
            self._handler = logging.StreamHandler(sys.stderr)
            self._handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATEFMT))
            for name in ("function", "cli"):
                logging.getLogger(name).addHandler(self._handler)
        for name in ("function", "cli"):
            logging.getLogger(name).setLevel(level)

    def teardown_logging(self):
        if self._handler is not None:
            for name in ("function", "cli"):
                logging.getLogger(name).removeHandler(self._handler)
            self._handler = None

    def log_message(self, message, level=logging.INFO):
        """记录日志消息

        Args:
            message (str): 要记录的消息
            level (int): 日志级别
        """
        logger.log(level, message)

    def load_config(self, config_path):
        """加载配置

        Args:
            config_path (str | None): 配置文件路径，为空时使用默认配置文件

        Returns:
            tuple: (SystemConfig, 扫描默认值 dict)
        """
        manager = ConfigManager(config_path)
        cfg = manager.read_config()
        self.log_message(f"已加载配置: {manager.config_path}")
        return cfg, manager.read_sweep_defaults()

    def run(self, argv=None):
        """解析参数并运行子命令

        Args:
            argv (list, optional): 命令行参数，默认为 sys.argv[1:]

        Returns:
            int: 退出码，成功为 0，出错为 1
        """
        if argv is None:
            argv = sys.argv[1:]
        args = self.parser.parse_args(join_value_lists(argv))
        self.setup_logging(args.verbose)
        self.show_progress = not args.quiet

        handlers = {
            "sweep": self.perform_sweep,
            "trial": self.perform_trial,
            "support": self.perform_support,
            "dump": self.perform_dump,
            "init-config": self.perform_init_config,
        }
        try:
            handlers[args.command](args)
        except Exception as e:
            self.log_message(f"执行失败: {e}", logging.ERROR)
            logger.debug("异常详情", exc_info=True)
            return 1
        finally:
            self.teardown_logging()
        return 0

    def perform_sweep(self, args):
        """执行扫描实验并写出报告"""
        cfg, defaults = self.load_config(args.config)
        axis = args.axis
        values = parse_values(axis, args.values) if args.values else DEFAULT_GRIDS[axis]
        algorithms = args.algorithms or [Algorithm.parse(a) for a in defaults["algorithms"]]
        spec = SweepSpec(
            base=cfg,
            axis=axis,
            values=values,
            algorithms=algorithms,
            trials=args.trials or defaults["trials"],
            seed_base=args.seed if args.seed is not None else defaults["seed"],
        )
        workers = args.workers or defaults["workers"]
        self.log_message(
            f"开始扫描 {axis.value}: {list(spec.values)}，算法 "
            f"{[a.value for a in spec.algorithms]}，每点 {spec.trials} 次试验"
        )

        report = BenchHarness(workers=workers, show_progress=self.show_progress).run_sweep(spec)

        # 帧数与 RF 链数的趋势检查：违例只报告，不视为错误
        if axis in (SweepAxis.FRAMES, SweepAxis.RF_CHAINS):
            for algorithm in spec.algorithms:
                for a, b, ea, eb in check_monotonic(report, algorithm):
                    self.log_message(
                        f"趋势违例 {algorithm.value}: {axis.value}={a} 的 NMSE {ea:.4e} "
                        f"未高于 {axis.value}={b} 的 {eb:.4e}",
                        logging.WARNING,
                    )

        out_path = args.out or FileHandler.generate_report_filename(axis.value)
        emit_report(report, out_path)
        self.log_message(f"报告已写入: {out_path}")

    def perform_trial(self, args):
        """运行单次试验并打印各算法的 NMSE"""
        cfg, defaults = self.load_config(args.config)
        algorithms = args.algorithms or [Algorithm.parse(a) for a in defaults["algorithms"]]
        result = run_trial(cfg, algorithms, args.seed)
        for algorithm in sorted(result.nmse, key=lambda a: a.value):
            print(f"{algorithm.value},{result.nmse[algorithm]:.12e},{result.scaled_nmse[algorithm]:.12e}")

        if args.trace:
            trace = trace_trial(cfg, args.seed)
            FileHandler.write_trace_csv(trace, args.trace)
            self.log_message(f"GAMP 诊断已写入: {args.trace}（{trace.iterations} 次迭代）")

    def perform_support(self, args):
        """打印角度域支撑集大小，用于对比网格对齐与泄漏两种情形"""
        cfg, _ = self.load_config(args.config)
        channel_rng = spawn_streams(args.seed, 3)[0]
        channel = generate_channel(cfg, channel_rng)
        size = virtual_support_size(channel.h_virtual, args.tol)
        print(size)
        self.log_message(f"{cfg.grid_mode.value}: {cfg.n_paths} 条路径，支撑集大小 {size}")

    def perform_dump(self, args):
        """写出测量模型的二进制转储"""
        cfg, _ = self.load_config(args.config)
        channel_rng, hardware_rng, noise_rng = spawn_streams(args.seed, 3)
        channel = generate_channel(cfg, channel_rng)
        ensemble = build_ensemble(cfg, channel, hardware_rng, noise_rng)
        FileHandler.write_ensemble_dump(ensemble, args.out)
        self.log_message(f"转储已写入: {args.out}（{ensemble.w_real.shape[0]}×{ensemble.w_real.shape[1]}）")

    def perform_init_config(self, args):
        """写出默认配置文件"""
        ConfigManager(args.out, must_exist=False).save_config(SystemConfig())
        self.log_message(f"默认配置已写入: {args.out}")


def main(argv=None):
    """命令行入口"""
    return MainApplication().run(argv)
