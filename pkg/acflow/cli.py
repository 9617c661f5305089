#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
acflow CLI - 命令行接口
"""

import argparse
import logging
import sys

from . import __version__, setup_logger
from .config import load_config
from .errors import AcflowError, ConfigError, SimulationAborted
from .experiments import (
    cmd_compare_multipliers,
    cmd_converge,
    cmd_equilibrium,
    cmd_expansions,
    cmd_profile_constants,
    cmd_simulate,
    cmd_spectral,
)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _eps_list(text):
    try:
        values = [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"无法解析 ε 列表: {text!r}")
    if not values or any(v <= 0 for v in values):
        raise argparse.ArgumentTypeError(f"ε 必须为正: {text!r}")
    return values


def build_parser():
    """构造命令行解析器"""
    parser = argparse.ArgumentParser(
        prog="acflow",
        description="保质量Allen-Cahn方程与保体积平均曲率流的数值实验",
    )
    parser.add_argument(
        "--version", "-v", action="version", version=f"acflow {__version__}"
    )
    # 添加debug参数
    parser.add_argument(
        "--debug", action="store_true", help="启用调试模式，输出更详细的日志"
    )
    parser.add_argument(
        "--workers", type=int, default=1, help="并行运行的进程数(默认为1)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("profile-constants", help="检查剖面常数 σ、σ*、∫θ₀'、I_ρ")

    p = sub.add_parser("simulate", help="按配置运行一次模拟并写出结果文件")
    p.add_argument("config", help="配置文件路径")

    p = sub.add_parser("converge", help="收敛性研究，拟合误差的 ε 阶数")
    p.add_argument("config", help="配置文件路径")
    p.add_argument(
        "--eps", type=_eps_list, default=[0.08, 0.057, 0.04, 0.028],
        help="递减的 ε 列表，逗号分隔(默认 0.08,0.057,0.04,0.028)",
    )

    p = sub.add_parser("compare-multipliers", help="比较BB与RS乘子的体积保持")
    p.add_argument("config", help="配置文件路径")

    p = sub.add_parser("equilibrium", help="圆的平衡态检查")
    p.add_argument("config", help="配置文件路径")

    p = sub.add_parser("expansions", help="检查 ∫f(u_k) 与 ∫√(4W(u_k)) 的展开式")
    p.add_argument("--eps", type=_eps_list, default=[0.08, 0.04, 0.02], help="ε 列表")
    p.add_argument("--radius", type=float, default=0.3, help="圆半径(默认0.3)")

    p = sub.add_parser("spectral", help="非平衡线性化算子的谱下界探测")
    p.add_argument("--eps", type=_eps_list, default=[0.04, 0.02], help="ε 列表")
    p.add_argument("--radius", type=float, default=0.3, help="圆半径(默认0.3)")
    return parser


def _dispatch(args):
    if args.command == "profile-constants":
        return cmd_profile_constants()
    if args.command == "expansions":
        return cmd_expansions(args.eps, radius=args.radius, workers=args.workers)
    if args.command == "spectral":
        return cmd_spectral(args.eps, radius=args.radius, workers=args.workers)

    config = load_config(args.config)
    if args.command == "simulate":
        return cmd_simulate(config)
    if args.command == "converge":
        return cmd_converge(config, args.eps, workers=args.workers)
    if args.command == "compare-multipliers":
        return cmd_compare_multipliers(config, workers=args.workers)
    return cmd_equilibrium(config)


def main(argv=None):
    """命令行入口点"""
    parser = build_parser()
    args = parser.parse_args(argv)

    # 设置日志
    setup_logger(args.debug)
    logger = logging.getLogger("acflow")

    try:
        report = _dispatch(args)
    except ConfigError as e:
        print(f"配置错误: {e}")
        return EXIT_USAGE
    except SimulationAborted as e:
        logger.error(f"模拟中止: {e}")
        print(f"错误: {e}")
        return EXIT_FAIL
    except (AcflowError, ValueError) as e:
        print(f"错误: {str(e)}")
        return EXIT_FAIL

    for line in report.lines:
        print(line)
    print(f"{report.name}: {'通过' if report.passed else '未通过'}")
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
