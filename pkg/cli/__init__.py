"""
命令行界面模块 - 信道估计仿真工具

该模块包含了仿真工具的命令行实现，
提供 sweep / trial / support / dump / init-config 等子命令。
"""
