"""
信道估计仿真工具 - 主入口文件

该文件是整个应用程序的启动入口，负责解析命令行并运行对应的子命令。
"""
import sys

from cli.main_app import main

if __name__ == "__main__":
    # 以子命令的返回值作为进程退出码
    sys.exit(main())
