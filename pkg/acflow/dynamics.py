#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
动力学模块 - 三种Allen-Cahn方程(BB、RS、无约束)的IMEX时间推进

反应项和乘子显式、扩散隐式。乘子由离散求和得到，使反应项之和精确为零，
离散质量因此守恒到舍入误差。
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .approx import ApproxBuilder, ApproxSpec
from .config import DT_AUTO_FACTOR, DT_MAX_FACTOR
from .diagnostics import measure
from .errors import AcflowError, DegeneratePhase, OvershootAbort, SimulationAborted
from .file_handler import FileHandler
from .fronttrack import FlowHistory, run_flow
from .geometry import (
    circle_curve,
    distance_data,
    ellipse_curve,
    extract_zero_levelset,
    largest_component,
)
from .grid import Field, GridSpec, helmholtz_solve, integrate
from .potential import eval_f, eval_sqrt4W

# 获取日志记录器
logger = logging.getLogger("acflow.dynamics")

# BB乘子分母的下限(相对于 |Ω|)
ETA_FLOOR = 1e-10

# 允许的 max|u| - 1
TOL_OVERSHOOT = 1e-3


class MultiplierKind(Enum):
    """质量约束的形式: BB(权重 √(4W))、RS(常数权重)、NONE(无约束)"""

    BB = "bb"
    RS = "rs"
    NONE = "none"

    @classmethod
    def from_name(cls, name):
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValueError(f"未知的乘子类型: {name}") from None


def dt_max(eps):
    return DT_MAX_FACTOR * eps * eps


def default_dt(eps):
    return DT_AUTO_FACTOR * eps * eps


@dataclass(frozen=True)
class SimState:
    """
    时间推进的状态

    Args:
        u (Field): 序参量场
        time (float): 时间
        eps (float): ε
        dt (float): 时间步长，不超过 0.2ε²
        kind (MultiplierKind): 乘子类型
        mass0 (float): 初始离散质量
        lambda_last (float): 最近一次的乘子值
    """

    u: Field
    time: float
    eps: float
    dt: float
    kind: MultiplierKind
    mass0: float
    lambda_last: float = 0.0

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError(f"eps 必须为正: {self.eps}")
        if self.dt <= 0 or self.dt > dt_max(self.eps) * (1.0 + 1e-12):
            raise ValueError(
                f"时间步长 {self.dt:.3e} 不在 (0, 0.2·eps² = {dt_max(self.eps):.3e}] 内"
            )


def _weight(u, kind):
    """乘子的权重函数 w(u)"""
    if kind is MultiplierKind.BB:
        return eval_sqrt4W(u)
    if kind is MultiplierKind.RS:
        return np.ones_like(u)
    return np.zeros_like(u)


def compute_multiplier(u, kind):
    """
    离散乘子 λ̂，使 Σ(f(u) - λ̂·w(u)) = 0

    Args:
        u (Field): 序参量场
        kind (MultiplierKind): 乘子类型

    Returns:
        float: BB 为 Σf/Σ√(4W)(即 ελ̂)，RS 为 (hx·hy/|Ω|)·Σf，NONE 为0
    """
    spec = u.spec
    if kind is MultiplierKind.NONE:
        return 0.0
    f_sum = float(np.sum(eval_f(u.values)))
    if kind is MultiplierKind.RS:
        return f_sum * spec.hx * spec.hy / spec.area
    w_sum = float(np.sum(eval_sqrt4W(u.values)))
    if w_sum * spec.hx * spec.hy < ETA_FLOOR * spec.area:
        logger.error(f"BB乘子分母 {w_sum * spec.hx * spec.hy:.3e} 低于下限")
        raise DegeneratePhase(
            f"∫√(4W(u)) = {w_sum * spec.hx * spec.hy:.3e} 低于 {ETA_FLOOR:g}·|Ω|，u 几乎处处为 ±1"
        )
    return f_sum / w_sum


def overshoot_tolerance(lam, kind):
    """
    允许的 max|u| - 1

    RS 没有极值原理，外层的平衡值是 u - u³ = λ̂ 的根 ≈ ±1 - λ̂/2，容差相应放宽 |λ̂|/2。
    """
    if kind is MultiplierKind.RS:
        return TOL_OVERSHOOT + 0.5 * abs(lam)
    return TOL_OVERSHOOT


def step(state):
    """
    推进一个IMEX Euler步

    r = f(uⁿ) - λ̂·w(uⁿ)，uⁿ⁺¹ = (I - dt·Δ_h)⁻¹(uⁿ + dt/ε²·r)。

    Args:
        state (SimState): 当前状态

    Returns:
        SimState: 新状态
    """
    u = state.u.values
    lam = compute_multiplier(state.u, state.kind)
    r = eval_f(u) - lam * _weight(u, state.kind)
    rhs = state.u.with_values(u + (state.dt / state.eps**2) * r)
    u_next = helmholtz_solve(rhs, state.dt)
    max_abs = u_next.max_abs()
    tol = overshoot_tolerance(lam, state.kind)
    if max_abs > 1.0 + tol:
        logger.error(f"t = {state.time + state.dt:.6g}: max|u| = {max_abs:.6f}")
        raise OvershootAbort(max_abs, tol)
    return replace(state, u=u_next, time=state.time + state.dt, lambda_last=lam)


@dataclass
class RunResult:
    """模拟结果: 记录、快照(时间, 场)、终态场及参考界面族"""

    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    final: Field = None
    flow: FlowHistory = None


def grid_spec(config):
    g = config.grid
    return GridSpec(g.nx, g.ny, g.Lx, g.Ly)


def initial_curve(config):
    """
    初始界面: 由配置给出的圆/椭圆，或从快照文件中提取的最大零水平集分量

    Returns:
        tuple: (Curve, 快照场或 None)
    """
    initial = config.initial
    npoints = config.fronttrack.npoints
    cx, cy = config.center
    if initial.kind == "circle":
        return circle_curve(cx, cy, initial.r, npoints), None
    if initial.kind == "ellipse":
        return ellipse_curve(cx, cy, initial.a, initial.b, npoints), None
    u, _, _ = FileHandler().read_snapshot(initial.path)
    curve, count = largest_component(extract_zero_levelset(u))
    if curve is None:
        raise ValueError(f"快照 '{initial.path}' 中没有闭合的零水平集")
    if count > 1:
        logger.warning(f"快照中有 {count} 条零水平集曲线，只追踪面积最大的一条")
    return curve.resample(npoints), u


def reference_flow(config, curve0=None):
    """
    用前沿追踪计算参考界面族 Γ_t

    BB 和 RS 使用保体积平均曲率流，NONE 使用普通平均曲率流(允许曲线提前消失)。
    """
    if curve0 is None:
        curve0, _ = initial_curve(config)
    kind = MultiplierKind.from_name(config.multiplier)
    plain = kind is MultiplierKind.NONE
    return run_flow(
        curve0,
        dt=config.fronttrack_dt,
        tmax=config.tmax,
        projection=config.fronttrack.projection,
        volume_preserving=not plain,
        allow_collapse=plain,
    )


def mean_zero_noise(shape, amplitude, seed):
    """最大幅值为 amplitude 的零均值随机扰动"""
    if amplitude <= 0:
        return np.zeros(shape)
    rng = np.random.default_rng(seed)
    phi = rng.uniform(-1.0, 1.0, size=shape)
    phi -= phi.mean()
    return phi * (amplitude / np.max(np.abs(phi)))


def run(config, writer=None, flow=None):
    """
    按配置运行一次模拟

    Args:
        config (SimConfig): 已校验的配置
        writer (RunWriter, optional): 记录和快照的输出
        flow (FlowHistory, optional): 共享的参考界面族，默认按配置计算

    Returns:
        RunResult: 记录、快照和终态
    """
    spec = grid_spec(config)
    kind = MultiplierKind.from_name(config.multiplier)
    eps = config.eps
    dt = config.time_step

    curve0, u_file = initial_curve(config)
    if flow is None:
        # 关闭参考比较时只需要 t = 0 的曲线组装初值
        if config.reference:
            flow = reference_flow(config, curve0)
        else:
            flow = FlowHistory([0.0], [curve0.oriented()], 0.0)
    builder = ApproxBuilder(ApproxSpec(eps, config.approx_order, flow), spec)

    if u_file is not None:
        if u_file.spec != spec:
            raise ValueError(
                f"快照网格 {u_file.spec.nx}×{u_file.spec.ny} 与配置网格 {spec.nx}×{spec.ny} 不一致"
            )
        u0 = u_file.values
    else:
        u0 = builder.build(0.0).u.values
    u0 = u0 + mean_zero_noise(spec.shape, config.initial.noise, config.initial.seed)

    state = SimState(
        u=Field(spec, u0),
        time=0.0,
        eps=eps,
        dt=dt,
        kind=kind,
        mass0=float(np.sum(u0)) * spec.hx * spec.hy,
    )
    state = replace(state, lambda_last=compute_multiplier(state.u, kind))
    nsteps = int(np.ceil(config.tmax / dt - 1e-9)) if config.tmax > 0 else 0
    logger.info(
        f"开始模拟: {kind.name}, eps = {eps}, dt = {dt:.3e}, {nsteps} 步, 网格 {spec.nx}×{spec.ny}"
    )

    result = RunResult(flow=flow)

    def record(n):
        curve = u_approx = distance = None
        if config.reference and flow.covers(state.time):
            curve = flow.curve_at(state.time)
            # 距离场每个记录时刻只算一次
            distance = distance_data(curve, spec)
            if kind is MultiplierKind.BB:
                u_approx = builder.build(state.time, distance=distance).u
        rec = measure(
            n, state.time, state.u, eps, state.lambda_last, curve, u_approx,
            distance=None if distance is None else distance[0],
        )
        result.records.append(rec)
        if writer is not None:
            writer.on_record(rec)

    def snapshot():
        index = len(result.snapshots)
        result.snapshots.append((state.time, state.u))
        if writer is not None:
            writer.on_snapshot(index, state.u, state.time)

    n = 0
    try:
        record(0)
        snapshot()
        for n in range(1, nsteps + 1):
            remaining = config.tmax - state.time
            h = remaining if n == nsteps and 0.0 < remaining < dt else dt
            state = step(replace(state, dt=h) if h != state.dt else state)
            if n % config.record_stride == 0 or n == nsteps:
                record(n)
            if n % config.snapshot_stride == 0 or n == nsteps:
                snapshot()
    except AcflowError as e:
        logger.exception(f"模拟在第 {n} 步中止")
        result.final = state.u
        raise SimulationAborted(n, state.time, e, result) from e

    result.final = state.u
    drift = abs(integrate(state.u) - state.mass0)
    logger.info(
        f"模拟完成: t = {state.time:.6g}, 质量漂移 {drift:.3e}, 记录 {len(result.records)} 条"
    )
    return result
