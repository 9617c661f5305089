#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
前沿追踪模块 - 平面闭曲线的保体积平均曲率流

法向速度 V = -κ + κ̄(保体积)或 V = -κ(普通平均曲率流)，显式Euler推进，
可选的精确面积投影，以及按弧长的重采样。
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateTriple, FlowCollapse, SelfIntersection
from .geometry import MIN_CURVE_POINTS, Curve

# 获取日志记录器
logger = logging.getLogger("acflow.fronttrack")

# 曲率流的稳定性约束 dt ≤ DT_FACTOR·Δs²
DT_FACTOR = 0.25

# 自动时间步长采用的系数
AUTO_DT_FACTOR = 0.2

# 重采样触发区间(相对于平均间距)
SPACING_BOUNDS = (0.5, 2.0)

# 存储的快照数上限
MAX_STORED = 1000


def curvature(curve):
    """
    顶点曲率，由相邻三点的外接圆给出

    正定向的凸曲线曲率为正。三点共线(|sin| < 1e-14)时该顶点曲率取0。

    Args:
        curve (Curve): 曲线

    Returns:
        np.ndarray: 每个顶点的曲率
    """
    p = curve.points
    prev = np.roll(p, 1, axis=0)
    nxt = np.roll(p, -1, axis=0)
    a = p - prev
    b = nxt - p
    c = nxt - prev
    la = np.hypot(a[:, 0], a[:, 1])
    lb = np.hypot(b[:, 0], b[:, 1])
    lc = np.hypot(c[:, 0], c[:, 1])
    if np.any(la == 0) or np.any(lb == 0) or np.any(lc == 0):
        raise DegenerateTriple("曲率计算中出现重合的相邻顶点")
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    kappa = 2.0 * cross / (la * lb * lc)
    kappa[np.abs(cross) < 1e-14 * la * lb] = 0.0
    return kappa


def _vertex_weights(curve):
    """每个顶点所占弧长(相邻两边长度的一半之和)"""
    lengths = curve.segment_lengths()
    return 0.5 * (lengths + np.roll(lengths, 1))


def average_curvature(curve):
    """
    弧长加权的平均曲率 (1/|Γ|)∫κ ds

    Args:
        curve (Curve): 曲线

    Returns:
        float: 平均曲率
    """
    w = _vertex_weights(curve)
    return float(np.sum(curvature(curve) * w) / np.sum(w))


def normals(curve):
    """顶点处的单位外法向"""
    p = curve.points
    t = np.roll(p, -1, axis=0) - np.roll(p, 1, axis=0)
    t /= np.hypot(t[:, 0], t[:, 1])[:, None]
    return np.column_stack([t[:, 1], -t[:, 0]])


def max_stable_dt(curve):
    """当前曲线允许的最大时间步长 0.25·(最小间距)²"""
    return DT_FACTOR * float(np.min(curve.segment_lengths())) ** 2


@dataclass(frozen=True)
class FlowState:
    """
    前沿追踪的状态

    Args:
        curve (Curve): 当前曲线
        time (float): 当前时间
        dt (float): 时间步长
        area0 (float): 初始面积
        projection (bool): 是否做精确面积投影
        volume_preserving (bool): False 时为普通平均曲率流
    """

    curve: Curve
    time: float
    dt: float
    area0: float
    projection: bool = True
    volume_preserving: bool = True


def _project_area(curve, area0, iterations=3):
    """沿法向做均匀平移，使面积等于 area0"""
    for _ in range(iterations):
        deficit = area0 - curve.signed_area()
        if abs(deficit) <= 1e-13 * abs(area0):
            break
        shift = deficit / curve.perimeter()
        curve = Curve(curve.points + shift * normals(curve))
    return curve


def _needs_resampling(curve):
    lengths = curve.segment_lengths()
    mean = lengths.mean()
    low, high = SPACING_BOUNDS
    return lengths.min() < low * mean or lengths.max() > high * mean


def step_flow(state):
    """
    推进一个时间步

    每个顶点沿外法向移动 dt·(-κᵢ + κ̄)；间距偏离平均值的 [0.5, 2] 倍时按弧长重采样；
    间距过小以致 dt 超过稳定界时减少顶点数；最后做面积投影并检查自交。

    Args:
        state (FlowState): 当前状态

    Returns:
        FlowState: 新状态
    """
    curve = state.curve
    t_new = state.time + state.dt
    kappa = curvature(curve)
    kbar = average_curvature(curve) if state.volume_preserving else 0.0
    velocity = -kappa + kbar
    curve = Curve(curve.points + state.dt * velocity[:, None] * normals(curve))

    if _needs_resampling(curve):
        logger.debug(f"t = {t_new:.6g}: 间距不均匀，按弧长重采样")
        curve = curve.resample()

    if state.dt > max_stable_dt(curve):
        spacing = np.sqrt(state.dt / (DT_FACTOR * 0.8))
        m = int(curve.perimeter() // spacing)
        if m < MIN_CURVE_POINTS:
            raise FlowCollapse(t_new, f"曲线周长 {curve.perimeter():.4g} 过小")
        logger.debug(f"t = {t_new:.6g}: 顶点数 {len(curve)} -> {m}")
        curve = curve.resample(m)

    if state.projection:
        curve = _project_area(curve, state.area0)

    if not curve.is_simple():
        logger.error(f"t = {t_new:.6g}: 曲线自相交")
        raise SelfIntersection(t_new)

    return replace(state, curve=curve, time=t_new)


class FlowHistory:
    """
    存储的曲线序列，支持时间上的线性插值

    Args:
        times (list): 快照时间(递增)
        curves (list): 对应的曲线
        tmax (float): 请求的终止时间
        collapse_time (float, optional): 曲线提前消失的时间
    """

    def __init__(self, times, curves, tmax, collapse_time=None):
        self.times = np.asarray(times, dtype=float)
        self.curves = list(curves)
        self.tmax = tmax
        self.collapse_time = collapse_time

    def __len__(self):
        return len(self.curves)

    @property
    def end_time(self):
        return float(self.times[-1])

    def covers(self, t):
        return self.times[0] - 1e-12 <= t <= self.end_time + 1e-12

    def curve_at(self, t):
        """
        t 时刻的曲线，在相邻快照之间线性插值

        顶点数不同时先把两条曲线重采样到相同顶点数。

        Args:
            t (float): 时间

        Returns:
            Curve: 插值得到的曲线
        """
        if not self.covers(t):
            raise ValueError(
                f"t = {t} 超出曲线序列的时间范围 [{self.times[0]}, {self.end_time}]"
            )
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        i = min(max(i, 0), len(self.curves) - 1)
        if i == len(self.curves) - 1 or abs(t - self.times[i]) <= 1e-15:
            return self.curves[i]
        c0, c1 = self.curves[i], self.curves[i + 1]
        if len(c0) != len(c1):
            m = max(len(c0), len(c1))
            c0, c1 = c0.resample(m), c1.resample(m)
        w = (t - self.times[i]) / (self.times[i + 1] - self.times[i])
        return Curve((1.0 - w) * c0.points + w * c1.points)

    def at_times(self, times):
        return [self.curve_at(t) for t in times]


def run_flow(
    curve0,
    dt=None,
    tmax=0.0,
    projection=True,
    volume_preserving=True,
    allow_collapse=False,
):
    """
    从 curve0 开始运行曲率流到 tmax

    Args:
        curve0 (Curve): 初始曲线
        dt (float, optional): 时间步长，默认 0.2·(最小间距)²
        tmax (float): 终止时间
        projection (bool): 是否做精确面积投影(仅保体积流)
        volume_preserving (bool): False 时为普通平均曲率流
        allow_collapse (bool): True 时曲线消失后截断序列而不是抛出异常

    Returns:
        FlowHistory: 存储的曲线序列
    """
    curve0 = curve0.oriented().validate()
    if dt is None:
        dt = AUTO_DT_FACTOR * float(np.min(curve0.segment_lengths())) ** 2
    if dt > max_stable_dt(curve0) * (1.0 + 1e-12):
        raise ValueError(
            f"前沿追踪时间步长 {dt:.3e} 超过稳定界 {max_stable_dt(curve0):.3e}"
        )
    nsteps = int(np.ceil(tmax / dt - 1e-9)) if tmax > 0 else 0
    store_every = max(1, int(np.ceil(nsteps / MAX_STORED)))
    logger.info(
        f"前沿追踪: {len(curve0)} 个顶点, dt = {dt:.3e}, {nsteps} 步, "
        f"{'保体积' if volume_preserving else '普通'}平均曲率流"
    )

    state = FlowState(
        curve=curve0,
        time=0.0,
        dt=dt,
        area0=curve0.signed_area(),
        projection=projection and volume_preserving,
        volume_preserving=volume_preserving,
    )
    times, curves = [0.0], [curve0]
    collapse_time = None
    for n in range(1, nsteps + 1):
        h = min(dt, tmax - state.time)
        try:
            state = step_flow(replace(state, dt=h))
        except FlowCollapse as e:
            if not allow_collapse:
                raise
            logger.warning(f"前沿追踪提前结束: {e}")
            collapse_time = e.time
            break
        if n % store_every == 0 or n == nsteps:
            times.append(state.time)
            curves.append(state.curve)

    history = FlowHistory(times, curves, tmax, collapse_time)
    final = history.curves[-1]
    logger.info(
        f"前沿追踪完成: t = {history.end_time:.6g}, 面积 {final.signed_area():.8f}, "
        f"周长 {final.perimeter():.8f}"
    )
    return history
