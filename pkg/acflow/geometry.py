#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
几何模块 - 符号距离、零水平集提取和面积测量

曲线是闭合多边形，正定向(逆时针，内部在左侧)。符号距离在曲线内部为负。
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from skimage.measure import find_contours, points_in_poly

from .errors import CurveTouchesBoundary, MalformedCurve
from .grid import Field, integrate

# 获取日志记录器
logger = logging.getLogger("acflow.geometry")

# 合法曲线的最少顶点数
MIN_CURVE_POINTS = 16

# 每批最近点计算的点对数上限
_PAIR_BUDGET = 1 << 22


@dataclass(frozen=True)
class Curve:
    """
    闭合多边形曲线，最后一个顶点隐式连接到第一个

    Args:
        points (np.ndarray): 顶点坐标，形状 (m, 2)
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise MalformedCurve(f"顶点数组形状应为 (m, 2)，实际为 {pts.shape}")
        if pts.shape[0] < 3:
            raise MalformedCurve(f"闭合曲线至少需要3个顶点，实际为 {pts.shape[0]}")
        if not np.all(np.isfinite(pts)):
            raise MalformedCurve("顶点坐标包含非有限值")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]

    def edges(self):
        """边向量 p[i+1] - p[i]"""
        return np.roll(self.points, -1, axis=0) - self.points

    def segment_lengths(self):
        return np.hypot(*self.edges().T)

    def perimeter(self):
        return float(np.sum(self.segment_lengths()))

    def signed_area(self):
        """鞋带公式，正定向为正"""
        x, y = self.points[:, 0], self.points[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def reversed(self):
        return Curve(self.points[::-1])

    def oriented(self):
        """返回正定向(逆时针)的曲线"""
        return self.reversed() if self.signed_area() < 0 else self

    def centroid(self):
        return self.points.mean(axis=0)

    def resample(self, m=None):
        """
        按弧长均匀重采样

        以周期三次样条插值坐标，第0个顶点保持不动。

        Args:
            m (int, optional): 新的顶点数，默认保持不变

        Returns:
            Curve: 重采样后的曲线
        """
        m = m or len(self)
        closed = np.vstack([self.points, self.points[:1]])
        s = np.concatenate([[0.0], np.cumsum(self.segment_lengths())])
        spline = CubicSpline(s, closed, bc_type="periodic")
        t = np.linspace(0.0, s[-1], m, endpoint=False)
        return Curve(spline(t))

    def is_simple(self):
        """
        检查非相邻边之间是否相交

        Returns:
            bool: 曲线简单(无自交)时为 True
        """
        a = self.points
        b = np.roll(a, -1, axis=0)
        m = len(a)
        rows = max(1, _PAIR_BUDGET // m)
        for start in range(0, m, rows):
            idx = np.arange(start, min(start + rows, m))
            p, r = a[idx, None, :], (b - a)[idx, None, :]
            q, s = a[None, :, :], (b - a)[None, :, :]
            denom = _cross(r, s)
            qp = q - p
            with np.errstate(divide="ignore", invalid="ignore"):
                t = _cross(qp, s) / denom
                u = _cross(qp, r) / denom
            hit = (denom != 0) & (t > 0) & (t < 1) & (u > 0) & (u < 1)
            # 相邻边共享顶点，不算相交
            j = np.arange(m)[None, :]
            i = idx[:, None]
            adjacent = (j == i) | (j == (i + 1) % m) | (j == (i - 1) % m)
            if np.any(hit & ~adjacent):
                return False
        return True

    def validate(self, min_points=MIN_CURVE_POINTS):
        """检查顶点数和面积，不合法时抛出 MalformedCurve"""
        if len(self) < min_points:
            raise MalformedCurve(f"曲线至少需要 {min_points} 个顶点，实际为 {len(self)}")
        scale = max(self.perimeter(), 1e-300)
        if abs(self.signed_area()) <= 1e-12 * scale * scale:
            raise MalformedCurve("曲线围成的面积为零(退化为直线)")
        return self


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def circle_curve(cx, cy, r, m=256):
    """圆周上均匀分布 m 个顶点的正定向多边形"""
    t = 2.0 * np.pi * np.arange(m) / m
    return Curve(np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)]))


def ellipse_curve(cx, cy, a, b, m=256):
    """半轴 a(x方向)、b(y方向)的椭圆，按弧长均匀分布顶点"""
    fine = max(8 * m, 1024)
    t = 2.0 * np.pi * np.arange(fine) / fine
    dense = Curve(np.column_stack([cx + a * np.cos(t), cy + b * np.sin(t)]))
    return dense.resample(m)


def nearest_points(curve, points):
    """
    每个查询点到多边形的精确最近点

    Args:
        curve (Curve): 曲线
        points (np.ndarray): 查询点，形状 (k, 2)

    Returns:
        tuple: (距离, 最近边下标, 边上参数 t∈[0,1])，均为长度 k 的数组
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    a = curve.points
    e = curve.edges()
    ee = np.maximum(np.sum(e * e, axis=1), 1e-300)
    m = len(a)
    k = len(points)
    dist = np.empty(k)
    seg = np.empty(k, dtype=int)
    frac = np.empty(k)
    rows = max(1, _PAIR_BUDGET // m)
    for start in range(0, k, rows):
        p = points[start : start + rows, None, :]
        ap = p - a[None, :, :]
        t = np.clip(np.sum(ap * e[None, :, :], axis=2) / ee[None, :], 0.0, 1.0)
        diff = ap - t[..., None] * e[None, :, :]
        d2 = np.sum(diff * diff, axis=2)
        j = np.argmin(d2, axis=1)
        r = np.arange(len(j))
        dist[start : start + rows] = np.sqrt(d2[r, j])
        seg[start : start + rows] = j
        frac[start : start + rows] = t[r, j]
    return dist, seg, frac


def contains(curve, points):
    """点是否在曲线围成的区域内"""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    return points_in_poly(points, curve.points)


def signed_distance(curve, p):
    """
    点到曲线的符号距离，内部为负

    Args:
        curve (Curve): 曲线
        p: 二维点

    Returns:
        float: 符号距离
    """
    dist, _, _ = nearest_points(curve, np.asarray(p, dtype=float)[None, :])
    inside = contains(curve, np.asarray(p, dtype=float)[None, :])[0]
    d = float(dist[0])
    return -d if inside else d


def check_clearance(curve, spec, margin=None):
    """
    检查曲线与区域边界的距离

    Args:
        curve (Curve): 曲线
        spec (GridSpec): 网格
        margin (float, optional): 要求的最小距离，默认 4·max(hx, hy)

    Returns:
        float: 实际的最小距离
    """
    if margin is None:
        margin = 4.0 * max(spec.hx, spec.hy)
    x, y = curve.points[:, 0], curve.points[:, 1]
    clearance = float(
        min(x.min(), spec.Lx - x.max(), y.min(), spec.Ly - y.max())
    )
    if clearance < margin:
        logger.error(f"曲线到边界距离 {clearance:.4g} 小于要求的 {margin:.4g}")
        raise CurveTouchesBoundary(
            f"曲线到区域边界的距离 {clearance:.4g} 小于 {margin:.4g}"
        )
    return clearance


def distance_data(curve, spec):
    """
    在所有单元中心计算符号距离及最近点信息

    Returns:
        tuple: (符号距离, 最近边下标, 边上参数)，形状均为 (ny, nx)
    """
    curve.validate()
    check_clearance(curve, spec)
    X, Y = spec.cell_centers()
    pts = np.column_stack([X.ravel(), Y.ravel()])
    dist, seg, frac = nearest_points(curve, pts)
    inside = contains(curve, pts)
    d = np.where(inside, -dist, dist)
    logger.debug(
        f"距离场: {spec.nx}×{spec.ny} 单元, {len(curve)} 个顶点, min d = {d.min():.4f}"
    )
    return d.reshape(spec.shape), seg.reshape(spec.shape), frac.reshape(spec.shape)


def distance_field(curve, spec):
    """
    符号距离场 d(x)

    Args:
        curve (Curve): 合法曲线(至少16个顶点)
        spec (GridSpec): 网格，曲线到边界的距离至少 4·max(hx, hy)

    Returns:
        Field: 单元中心的符号距离
    """
    d, _, _ = distance_data(curve, spec)
    return Field(spec, d)


def extract_zero_levelset(u):
    """
    用marching squares提取零水平集

    碰到区域边界的开曲线被丢弃并记录警告。

    Args:
        u (Field): 序参量场

    Returns:
        list: 闭合曲线(Curve)列表，没有变号时为空
    """
    spec = u.spec
    curves = []
    discarded = 0
    for contour in find_contours(np.asarray(u.values), 0.0):
        if not np.allclose(contour[0], contour[-1]):
            discarded += 1
            continue
        rows, cols = contour[:-1, 0], contour[:-1, 1]
        pts = np.column_stack([(cols + 0.5) * spec.hx, (rows + 0.5) * spec.hy])
        if len(pts) < 3:
            continue
        curves.append(Curve(pts).oriented())
    if discarded:
        logger.warning(f"丢弃 {discarded} 条碰到区域边界的等值线")
    logger.debug(f"零水平集: {len(curves)} 条闭合曲线")
    return curves


def largest_component(curves):
    """
    取面积绝对值最大的曲线

    Returns:
        tuple: (曲线或None, 曲线数目)
    """
    if not curves:
        return None, 0
    best = max(curves, key=lambda c: abs(c.signed_area()))
    return best, len(curves)


def enclosed_area(c):
    """鞋带公式计算的多边形面积，正定向为正"""
    return c.signed_area()


def phase_area(u):
    """u ≈ -1 区域的面积 ∫(1-u)/2"""
    return integrate(u.with_values((1.0 - u.values) / 2.0))
