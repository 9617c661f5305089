#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
诊断模块 - 质量、能量、乘子、面积、L²误差的测量以及谱下界探测
"""

import logging
from dataclasses import astuple, dataclass, fields

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import EigSolverStall
from .geometry import (
    distance_field,
    enclosed_area,
    extract_zero_levelset,
    largest_component,
    phase_area,
)
from .grid import Field, gradient_squared, integrate, laplacian_matrix
from .potential import eval_fprime, eval_W

# 获取日志记录器
logger = logging.getLogger("acflow.diagnostics")

# 特征值求解器允许的最大单元数
SPECTRAL_MAX_CELLS = 600 * 600

# 特征值的相对容差
SPECTRAL_RTOL = 1e-6


@dataclass(frozen=True)
class TimeSeriesRecord:
    """时间序列中的一行"""

    step: int
    time: float
    mass: float
    # BB 为 ελ̂，RS 为 (1/|Ω|)∫f，NONE 为0
    lambda_: float
    area_levelset: float
    area_phase: float
    gl_energy: float
    l2_err_step: float = float("nan")
    l2_err_approx: float = float("nan")
    levelset_count: int = 0

    @staticmethod
    def header():
        names = [f.name.rstrip("_") for f in fields(TimeSeriesRecord)]
        return ",".join(names)

    def to_row(self):
        """逗号分隔的一行，浮点数输出17位有效数字"""
        return ",".join(
            str(v) if isinstance(v, (int, np.integer)) and not isinstance(v, bool) else f"{float(v):.17g}"
            for v in astuple(self)
        )

    @classmethod
    def from_row(cls, row):
        parts = row.strip().split(",")
        if len(parts) != len(fields(cls)):
            raise ValueError(f"时间序列行的列数 {len(parts)} 不正确: {row!r}")
        values = [int(parts[0])] + [float(p) for p in parts[1:-1]] + [int(parts[-1])]
        return cls(*values)


CSV_HEADER = TimeSeriesRecord.header()


def sharp_interface_field(curve, spec, distance=None):
    """尖锐界面极限 ũ：曲线内部为 -1，外部为 +1。distance 为已算好的符号距离数组"""
    d = distance_field(curve, spec).values if distance is None else distance
    return Field(spec, np.where(d < 0.0, -1.0, 1.0))


def l2_error_vs_step(u, curve, distance=None):
    """
    与尖锐界面极限 ũ 的 L² 误差

    Args:
        u (Field): 序参量场
        curve (Curve): 参考界面
        distance (np.ndarray, optional): 曲线在单元中心的符号距离，省略时重新计算

    Returns:
        float: ‖u - ũ‖_L²
    """
    ref = sharp_interface_field(curve, u.spec, distance)
    diff = u.values - ref.values
    return float(np.sqrt(integrate(u.with_values(diff * diff))))


def l2_distance(u, v):
    """两个场之差的 L² 范数"""
    diff = u.values - v.values
    return float(np.sqrt(integrate(u.with_values(diff * diff))))


def gl_energy(u, eps):
    """
    Ginzburg-Landau能量 ∫(ε/2)|∇u|² + W(u)/ε

    Args:
        u (Field): 序参量场
        eps (float): ε

    Returns:
        float: 能量
    """
    if eps <= 0:
        raise ValueError(f"eps 必须为正: {eps}")
    density = 0.5 * eps * gradient_squared(u) + eval_W(u.values) / eps
    return integrate(u.with_values(density))


def unbalanced_operator(u_k, eps, ratio):
    """
    非平衡线性化算子 -Δ_h - ε⁻²(f'(u_k) + 2·ratio·u_k) 的稀疏矩阵

    Returns:
        scipy.sparse.csr_matrix: 对称矩阵
    """
    potential = (eval_fprime(u_k.values) + 2.0 * ratio * u_k.values) / (eps * eps)
    return (laplacian_matrix(u_k.spec) - sp.diags(potential.ravel())).tocsr()


def spectral_lower_bound(u_k, eps, ratio, max_cells=SPECTRAL_MAX_CELLS, rtol=SPECTRAL_RTOL):
    """
    非平衡线性化算子的最小特征值

    用Gershgorin圆盘给出的下界做平移，以平移逆迭代的Krylov形式(ARPACK shift-invert
    Lanczos)求离平移点最近的特征值，即最小特征值。

    Args:
        u_k (Field): 近似解
        eps (float): ε
        ratio (float): A_k/B_k
        max_cells (int): 允许的最大单元数
        rtol (float): 特征值相对容差

    Returns:
        float: 最小特征值
    """
    spec = u_k.spec
    if spec.nx * spec.ny > max_cells:
        raise ValueError(
            f"网格 {spec.nx}×{spec.ny} 超过特征值求解的规模上限 {max_cells}"
        )
    matrix = unbalanced_operator(u_k, eps, ratio)
    diag = matrix.diagonal()
    radius = np.asarray(abs(matrix).sum(axis=1)).ravel() - np.abs(diag)
    gershgorin = float(np.min(diag - radius))
    shift = gershgorin - max(1.0, 0.01 * abs(gershgorin))
    logger.debug(
        f"谱探测: {spec.nx}×{spec.ny}, eps={eps}, ratio={ratio:.6e}, 平移 {shift:.6e}"
    )
    try:
        _, vectors = eigsh(
            matrix, k=1, sigma=shift, which="LM", tol=rtol, ncv=min(32, matrix.shape[0] - 1)
        )
    except ArpackNoConvergence as e:
        logger.error(f"特征值求解未收敛: {e}")
        raise EigSolverStall(f"ARPACK 未收敛 (eps={eps})") from e
    # Rayleigh商，误差是特征向量误差的平方
    v = vectors[:, 0]
    value = float(v @ (matrix @ v) / (v @ v))
    logger.info(f"最小特征值 (eps={eps}): {value:.6f}")
    return value


def volume_drift(records, domain_area=None):
    """
    两种面积列相对于初值的最大相对偏差

    给出 domain_area 时另外计算扣除体相偏移后的零水平集漂移。RS 乘子使两相的体相值
    变为 ±1 - λ̂/2，质量守恒使界面围成的面积相应减少 λ̂·|Ω|/4。

    Args:
        records (list): TimeSeriesRecord 列表，至少两条
        domain_area (float, optional): 区域面积 |Ω|

    Returns:
        dict: {"max_rel_levelset": ..., "max_rel_phase": ...}，以及可选的 "max_rel_levelset_bulk"
    """
    if len(records) < 2:
        raise ValueError(f"至少需要两条记录，实际为 {len(records)}")

    def drift(column, shift=None):
        values = np.array([getattr(r, column) for r in records], dtype=float)
        if shift is not None:
            values = values + shift
        if not np.isfinite(values[0]) or values[0] == 0.0:
            return float("nan")
        rel = np.abs(values - values[0]) / abs(values[0])
        return float(np.nanmax(rel))

    result = {
        "max_rel_levelset": drift("area_levelset"),
        "max_rel_phase": drift("area_phase"),
    }
    if domain_area is not None:
        lam = np.array([r.lambda_ for r in records], dtype=float)
        # 初始场的体相值还是 ±1
        lam[0] = 0.0
        result["max_rel_levelset_bulk"] = drift("area_levelset", 0.25 * domain_area * lam)
    return result


def measure(step, time, u, eps, lam, curve=None, u_approx=None, distance=None):
    """
    在一个时刻测量所有诊断量

    Args:
        step (int): 步数
        time (float): 时间
        u (Field): 序参量场
        eps (float): ε
        lam (float): 当前乘子
        curve (Curve, optional): 参考界面，为 None 时 l2_err_step 为 NaN
        u_approx (Field, optional): 近似解，为 None 时 l2_err_approx 为 NaN
        distance (np.ndarray, optional): curve 的符号距离数组，与近似解共用

    Returns:
        TimeSeriesRecord: 一行记录
    """
    component, count = largest_component(extract_zero_levelset(u))
    area_levelset = enclosed_area(component) if component is not None else float("nan")
    record = TimeSeriesRecord(
        step=int(step),
        time=float(time),
        mass=integrate(u),
        lambda_=float(lam),
        area_levelset=float(area_levelset),
        area_phase=phase_area(u),
        gl_energy=gl_energy(u, eps),
        l2_err_step=l2_error_vs_step(u, curve, distance) if curve is not None else float("nan"),
        l2_err_approx=l2_distance(u, u_approx) if u_approx is not None else float("nan"),
        levelset_count=int(count),
    )
    logger.debug(f"记录: {record}")
    return record
