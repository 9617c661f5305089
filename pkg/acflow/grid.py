#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
网格模块 - 二维均匀网格、离散场、Neumann拉普拉斯算子与隐式Helmholtz求解

网格是单元中心型，边界用反射虚单元封闭，常数向量是拉普拉斯算子的精确零空间，
离散质量守恒因此精确到舍入误差。
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.fft import dctn, idctn

from .errors import SolverDivergence

# 获取日志记录器
logger = logging.getLogger("acflow.grid")

# 单个网格允许的最大单元数
MAX_CELLS = 1 << 20

# Helmholtz残差目标(相对于 ‖g‖∞)
HELMHOLTZ_RTOL = 1e-10


@dataclass(frozen=True)
class GridSpec:
    """
    矩形区域 [0,Lx]×[0,Ly] 上的单元中心网格

    Args:
        nx (int): x方向单元数
        ny (int): y方向单元数
        Lx (float): x方向边长
        Ly (float): y方向边长
    """

    nx: int
    ny: int
    Lx: float = 1.0
    Ly: float = 1.0

    def __post_init__(self):
        if self.nx < 8 or self.ny < 8:
            raise ValueError(f"每个方向至少8个单元: nx={self.nx}, ny={self.ny}")
        if self.nx * self.ny > MAX_CELLS:
            raise ValueError(f"单元数 {self.nx * self.ny} 超过上限 {MAX_CELLS}")
        if self.Lx <= 0 or self.Ly <= 0:
            raise ValueError(f"区域边长必须为正: Lx={self.Lx}, Ly={self.Ly}")

    @property
    def hx(self):
        return self.Lx / self.nx

    @property
    def hy(self):
        return self.Ly / self.ny

    @property
    def area(self):
        """区域面积 |Ω|"""
        return self.Lx * self.Ly

    @property
    def shape(self):
        """数组形状 (ny, nx)，按行存储"""
        return (self.ny, self.nx)

    def cell_centers(self):
        """返回单元中心坐标 (X, Y)，形状均为 (ny, nx)"""
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y)


@dataclass(frozen=True)
class Field:
    """
    网格上的离散标量场，values 形状为 (ny, nx)，只读

    Args:
        spec (GridSpec): 网格
        values (np.ndarray): 单元中心值
    """

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.size != self.spec.nx * self.spec.ny:
            raise ValueError(
                f"场的大小 {values.size} 与网格 {self.spec.nx}×{self.spec.ny} 不一致"
            )
        values = values.reshape(self.spec.shape)
        if not np.all(np.isfinite(values)):
            raise ValueError("场包含非有限值")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, spec, c):
        return cls(spec, np.full(spec.shape, float(c)))

    @classmethod
    def from_function(cls, spec, func):
        """用 func(X, Y) 在单元中心采样"""
        X, Y = spec.cell_centers()
        return cls(spec, np.broadcast_to(func(X, Y), spec.shape))

    def with_values(self, values):
        return Field(self.spec, values)

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def mean(self):
        return float(np.mean(self.values))


def laplacian(u):
    """
    五点差分拉普拉斯算子，反射虚单元实现齐次Neumann边界

    Args:
        u (Field): 输入场

    Returns:
        Field: Δ_h u，所有单元之和在舍入误差内为0
    """
    spec = u.spec
    p = np.pad(u.values, 1, mode="edge")
    c = p[1:-1, 1:-1]
    lap = (p[1:-1, 2:] - 2.0 * c + p[1:-1, :-2]) / spec.hx**2 + (
        p[2:, 1:-1] - 2.0 * c + p[:-2, 1:-1]
    ) / spec.hy**2
    return Field(spec, lap)


def _neumann_symbol(n, h):
    """一维反射边界二阶差分的特征值 (2-2cos(πk/n))/h²"""
    k = np.arange(n)
    return (2.0 - 2.0 * np.cos(np.pi * k / n)) / (h * h)


def helmholtz_solve(g, tau):
    """
    求解 (I - τΔ_h)v = g，Neumann边界

    反射边界的单元中心拉普拉斯算子被DCT-II精确对角化。求解后做一次均值投影，
    保证 mean(v) = mean(g)。

    Args:
        g (Field): 右端项
        tau (float): 正的扩散系数(时间步长)

    Returns:
        Field: 解 v
    """
    if tau <= 0:
        raise ValueError(f"tau 必须为正: {tau}")
    spec = g.spec
    mu = _neumann_symbol(spec.ny, spec.hy)[:, None] + _neumann_symbol(
        spec.nx, spec.hx
    )[None, :]
    coeffs = dctn(g.values, type=2, norm="ortho")
    v = idctn(coeffs / (1.0 + tau * mu), type=2, norm="ortho")
    v += g.values.mean() - v.mean()

    result = Field(spec, v)
    residual = np.max(
        np.abs(v - tau * laplacian(result).values - g.values)
    )
    target = HELMHOLTZ_RTOL * max(np.max(np.abs(g.values)), 1e-300)
    if residual > target:
        logger.error(f"Helmholtz残差 {residual:.3e} 超过目标 {target:.3e}")
        raise SolverDivergence(residual, target)
    return result


def integrate(u):
    """中点公式积分 hx·hy·Σu"""
    spec = u.spec
    return float(spec.hx * spec.hy * np.sum(u.values))


def gradient_squared(u):
    """
    中心差分 |∇_h u|²，边界处反射封闭

    Args:
        u (Field): 输入场

    Returns:
        np.ndarray: 每个单元的梯度平方
    """
    spec = u.spec
    p = np.pad(u.values, 1, mode="edge")
    ux = (p[1:-1, 2:] - p[1:-1, :-2]) / (2.0 * spec.hx)
    uy = (p[2:, 1:-1] - p[:-2, 1:-1]) / (2.0 * spec.hy)
    return ux * ux + uy * uy


def _neumann_matrix_1d(n, h):
    main = np.full(n, 2.0)
    main[0] = main[-1] = 1.0
    off = -np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1]) / (h * h)


def laplacian_matrix(spec):
    """
    与 laplacian 相同模板的稀疏矩阵 -Δ_h(对称半正定)

    按行展开(下标 j*nx + i)。

    Args:
        spec (GridSpec): 网格

    Returns:
        scipy.sparse.csr_matrix: 大小 (nx·ny)×(nx·ny)
    """
    ax = _neumann_matrix_1d(spec.nx, spec.hx)
    ay = _neumann_matrix_1d(spec.ny, spec.hy)
    return (
        sp.kron(sp.identity(spec.ny), ax) + sp.kron(ay, sp.identity(spec.nx))
    ).tocsr()
