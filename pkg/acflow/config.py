#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
配置模块 - 模拟配置的解析与校验

配置文件每行一个 "键 = 值"，键用点号表示层级，"#" 之后为注释。
"""

import logging
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError

# 获取日志记录器
logger = logging.getLogger("acflow.config")

MULTIPLIERS = ("bb", "rs", "none")
INITIAL_KINDS = ("circle", "ellipse", "file")

# 显式反应项的时间步长上限 dt ≤ DT_MAX_FACTOR·ε²
DT_MAX_FACTOR = 0.2

# 自动时间步长 dt = DT_AUTO_FACTOR·ε²
DT_AUTO_FACTOR = 0.1


@dataclass(frozen=True)
class GridConfig:
    nx: int = 512
    ny: int = 512
    Lx: float = 2.0
    Ly: float = 2.0


@dataclass(frozen=True)
class InitialConfig:
    """初始界面: 圆(cx, cy, r)、椭圆(cx, cy, a, b)或快照文件(path)"""

    kind: str = "circle"
    cx: float = None
    cy: float = None
    r: float = 0.3
    a: float = 0.35
    b: float = 0.25
    path: str = None
    noise: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class FrontTrackConfig:
    npoints: int = 256
    dt: object = "auto"
    projection: bool = True


@dataclass(frozen=True)
class SimConfig:
    """一次模拟的全部参数"""

    grid: GridConfig = field(default_factory=GridConfig)
    eps: float = 0.03
    dt: object = "auto"
    tmax: float = 0.05
    multiplier: str = "bb"
    initial: InitialConfig = field(default_factory=InitialConfig)
    approx_order: int = 2
    record_stride: int = 10
    snapshot_stride: int = 100
    output_dir: str = "output"
    preview: bool = False
    reference: bool = True
    fronttrack: FrontTrackConfig = field(default_factory=FrontTrackConfig)

    @property
    def time_step(self):
        """实际使用的时间步长"""
        return DT_AUTO_FACTOR * self.eps**2 if self.dt == "auto" else float(self.dt)

    @property
    def center(self):
        cx = self.initial.cx if self.initial.cx is not None else 0.5 * self.grid.Lx
        cy = self.initial.cy if self.initial.cy is not None else 0.5 * self.grid.Ly
        return cx, cy

    @property
    def fronttrack_dt(self):
        return None if self.fronttrack.dt == "auto" else float(self.fronttrack.dt)

    def with_eps(self, eps, resolve_grid=None):
        """
        替换 ε，时间步长回到自动值

        Args:
            eps (float): 新的 ε
            resolve_grid (float, optional): 给定时网格加密到 h ≤ resolve_grid·ε

        Returns:
            SimConfig: 新配置(已校验)
        """
        grid = self.grid
        if resolve_grid is not None:
            h = resolve_grid * eps
            grid = replace(
                grid,
                nx=max(grid.nx, int(np.ceil(grid.Lx / h))),
                ny=max(grid.ny, int(np.ceil(grid.Ly / h))),
            )
        return validate_config(replace(self, eps=float(eps), dt="auto", grid=grid))


def _parse_bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"无法解析为布尔值: {text!r}")


def _parse_auto_float(text):
    return "auto" if text.strip().lower() == "auto" else float(text)


# 键 -> (所在分组, 字段名, 解析函数)
_KEYS = {
    "grid.nx": ("grid", "nx", int),
    "grid.ny": ("grid", "ny", int),
    "grid.Lx": ("grid", "Lx", float),
    "grid.Ly": ("grid", "Ly", float),
    "eps": (None, "eps", float),
    "dt": (None, "dt", _parse_auto_float),
    "tmax": (None, "tmax", float),
    "multiplier": (None, "multiplier", str.lower),
    "initial.kind": ("initial", "kind", str.lower),
    "initial.cx": ("initial", "cx", float),
    "initial.cy": ("initial", "cy", float),
    "initial.r": ("initial", "r", float),
    "initial.a": ("initial", "a", float),
    "initial.b": ("initial", "b", float),
    "initial.path": ("initial", "path", str),
    "initial.noise": ("initial", "noise", float),
    "initial.seed": ("initial", "seed", int),
    "approx_order": (None, "approx_order", int),
    "record_stride": (None, "record_stride", int),
    "snapshot_stride": (None, "snapshot_stride", int),
    "output_dir": (None, "output_dir", str),
    "output.preview": (None, "preview", _parse_bool),
    "diagnostics.reference": (None, "reference", _parse_bool),
    "fronttrack.npoints": ("fronttrack", "npoints", int),
    "fronttrack.dt": ("fronttrack", "dt", _parse_auto_float),
    "fronttrack.projection": ("fronttrack", "projection", _parse_bool),
}


def parse_config(text, base_dir=None):
    """
    解析配置文本

    Args:
        text (str): 配置内容
        base_dir (str, optional): initial.path 为相对路径时的基准目录

    Returns:
        SimConfig: 已校验的配置
    """
    top, groups = {}, {"grid": {}, "initial": {}, "fronttrack": {}}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"缺少 '=': {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(key, "未知的配置项")
        group, name, parse = _KEYS[key]
        try:
            parsed = parse(value)
        except ValueError as e:
            raise ConfigError(key, f"无法解析值 {value!r}: {e}") from e
        if key == "initial.path" and base_dir and not os.path.isabs(parsed):
            parsed = os.path.join(base_dir, parsed)
        (groups[group] if group else top)[name] = parsed

    config = SimConfig(
        grid=GridConfig(**groups["grid"]),
        initial=InitialConfig(**groups["initial"]),
        fronttrack=FrontTrackConfig(**groups["fronttrack"]),
        **top,
    )
    return validate_config(config)


def load_config(path):
    """
    读取并解析配置文件

    Args:
        path (str): 配置文件路径

    Returns:
        SimConfig: 已校验的配置
    """
    if not os.path.isfile(path):
        raise ConfigError("config", f"配置文件 '{path}' 不存在")
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    logger.debug(f"读取配置文件: {path}")
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))


def validate_config(config):
    """
    校验配置，出错时抛出带键名的 ConfigError

    Returns:
        SimConfig: 原配置
    """
    grid = config.grid
    if grid.nx < 8:
        raise ConfigError("grid.nx", f"至少需要8个单元: {grid.nx}")
    if grid.ny < 8:
        raise ConfigError("grid.ny", f"至少需要8个单元: {grid.ny}")
    if grid.Lx <= 0:
        raise ConfigError("grid.Lx", f"必须为正: {grid.Lx}")
    if grid.Ly <= 0:
        raise ConfigError("grid.Ly", f"必须为正: {grid.Ly}")
    if config.eps <= 0:
        raise ConfigError("eps", f"必须为正: {config.eps}")
    if config.dt != "auto":
        if config.dt <= 0:
            raise ConfigError("dt", f"必须为正: {config.dt}")
        if config.dt > DT_MAX_FACTOR * config.eps**2 * (1.0 + 1e-12):
            raise ConfigError(
                "dt", f"{config.dt:.3e} 超过上限 0.2·eps² = {DT_MAX_FACTOR * config.eps**2:.3e}"
            )
    if config.tmax < 0:
        raise ConfigError("tmax", f"不能为负: {config.tmax}")
    if config.multiplier not in MULTIPLIERS:
        raise ConfigError("multiplier", f"必须是 {'|'.join(MULTIPLIERS)} 之一: {config.multiplier}")
    if config.approx_order not in (0, 2):
        raise ConfigError("approx_order", f"必须是 0 或 2: {config.approx_order}")
    if config.record_stride < 1:
        raise ConfigError("record_stride", f"必须为正整数: {config.record_stride}")
    if config.snapshot_stride < 1:
        raise ConfigError("snapshot_stride", f"必须为正整数: {config.snapshot_stride}")
    if config.initial.noise < 0:
        raise ConfigError("initial.noise", f"不能为负: {config.initial.noise}")
    if config.fronttrack.npoints < 16:
        raise ConfigError("fronttrack.npoints", f"至少需要16个顶点: {config.fronttrack.npoints}")
    if config.fronttrack.dt != "auto" and config.fronttrack.dt <= 0:
        raise ConfigError("fronttrack.dt", f"必须为正: {config.fronttrack.dt}")
    _validate_initial(config)
    return config


def _validate_initial(config):
    initial = config.initial
    if initial.kind not in INITIAL_KINDS:
        raise ConfigError("initial.kind", f"必须是 {'|'.join(INITIAL_KINDS)} 之一: {initial.kind}")
    if initial.kind == "file":
        if not initial.path:
            raise ConfigError("initial.path", "initial.kind = file 时必须给出快照路径")
        return

    if initial.kind == "circle":
        if initial.r <= 0:
            raise ConfigError("initial.r", f"必须为正: {initial.r}")
        extent, key = initial.r, "initial.r"
    else:
        if initial.a <= 0:
            raise ConfigError("initial.a", f"必须为正: {initial.a}")
        if initial.b <= 0:
            raise ConfigError("initial.b", f"必须为正: {initial.b}")
        extent, key = max(initial.a, initial.b), "initial.a" if initial.a >= initial.b else "initial.b"

    cx, cy = config.center
    room = min(cx, config.grid.Lx - cx, cy, config.grid.Ly - cy)
    needed = extent + 2.0 * np.sqrt(config.eps)
    if needed >= room:
        raise ConfigError(
            key,
            f"界面加过渡层宽度 {needed:.4g} 超出中心到边界的距离 {room:.4g}",
        )
