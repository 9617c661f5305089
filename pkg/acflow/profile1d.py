#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
一维剖面模块 - 驻波 θ₀、线性化算子 ℒ、可解性条件与有界解求解

ℒψ := -ψ'' - f'(θ₀)ψ，θ₀(ρ) = tanh(ρ/√2)。
所有剖面都在关于0对称的均匀网格 RhoGrid 上采样。
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson

from .errors import SolvabilityViolation
from .potential import eval_f, eval_fprime, eval_W

# 获取日志记录器
logger = logging.getLogger("acflow.profile1d")

SQRT2 = np.sqrt(2.0)

# 可解性积分的容差
TOL_SOLV = 1e-8


@dataclass(frozen=True)
class RhoGrid:
    """
    拉伸变量 ρ 的对称网格

    Args:
        rho_max (float): 截断半径
        n (int): 节点数(奇数，保证 ρ=0 是节点)
    """

    rho_max: float = 20.0
    n: int = 4001

    def __post_init__(self):
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError(f"RhoGrid 节点数必须为不小于3的奇数: n={self.n}")
        if self.rho_max <= 0:
            raise ValueError(f"rho_max 必须为正: {self.rho_max}")
        if np.exp(-SQRT2 * self.rho_max) >= 1e-12:
            raise ValueError(
                f"rho_max={self.rho_max} 太小，θ₀ 的尾部截断误差超过 1e-12"
            )

    @property
    def spacing(self):
        return 2.0 * self.rho_max / (self.n - 1)

    @property
    def mid(self):
        """ρ=0 对应的节点下标"""
        return self.n // 2

    @property
    def nodes(self):
        # 整数倍步长，保证节点严格对称
        m = self.mid
        return self.spacing * np.arange(-m, m + 1, dtype=float)


@dataclass(frozen=True)
class Profile:
    """RhoGrid 上采样的一维函数"""

    grid: RhoGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ValueError(
                f"剖面长度 {values.shape} 与网格节点数 {self.grid.n} 不一致"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("剖面包含非有限值")
        object.__setattr__(self, "values", values)

    def __call__(self, rho):
        """线性插值求值，网格外取端点值"""
        return np.interp(rho, self.grid.nodes, self.values)


@dataclass(frozen=True)
class ProfileConstants:
    """剖面常数 σ、σ* 及相关积分"""

    sigma: float
    sigma_star: float
    int_theta_prime: float
    int_theta_prime_sq: float
    int_rho_f: float
    c0: float


def theta0(rho):
    """驻波 θ₀(ρ) = tanh(ρ/√2)"""
    return np.tanh(np.asarray(rho, dtype=float) / SQRT2)


def theta0_prime(rho):
    """
    θ₀'(ρ) = sech²(ρ/√2)/√2

    用 4e^{-2|x|}/(1+e^{-2|x|})² 计算 sech²，避免 cosh 在尾部溢出。
    """
    x = np.abs(np.asarray(rho, dtype=float)) / SQRT2
    e = np.exp(-2.0 * x)
    return 4.0 * e / (1.0 + e) ** 2 / SQRT2


def sample(func, grid=None):
    """在网格上采样函数，返回 Profile"""
    grid = grid or RhoGrid()
    return Profile(grid, func(grid.nodes))


@lru_cache(maxsize=8)
def profile_constants(grid=None):
    """
    用复合Simpson公式计算剖面常数

    Args:
        grid (RhoGrid, optional): 积分网格，默认 rho_max=20, n=4001

    Returns:
        ProfileConstants: σ = ∫(1-θ₀²)θ₀' / ∫θ₀'²，σ* = (∫θ₀'²)⁻¹，
            ∫θ₀'，∫θ₀'²，∫ρf(θ₀) 以及界面能 c0
    """
    grid = grid or RhoGrid()
    rho = grid.nodes
    h = grid.spacing
    th = theta0(rho)
    thp = theta0_prime(rho)

    int_tp = simpson(thp, dx=h)
    int_tp_sq = simpson(thp * thp, dx=h)
    numerator = simpson((1.0 - th * th) * thp, dx=h)
    int_rho_f = simpson(rho * eval_f(th), dx=h)
    c0 = simpson(0.5 * thp * thp + eval_W(th), dx=h)

    constants = ProfileConstants(
        sigma=numerator / int_tp_sq,
        sigma_star=1.0 / int_tp_sq,
        int_theta_prime=int_tp,
        int_theta_prime_sq=int_tp_sq,
        int_rho_f=int_rho_f,
        c0=c0,
    )
    logger.debug(f"剖面常数: {constants}")
    return constants


def check_solvability(A):
    """
    可解性积分 ∫A(ρ)θ₀'(ρ)dρ

    Args:
        A (Profile): 右端项

    Returns:
        float: 积分值，调用者以 |值| < TOL_SOLV 判定可解
    """
    rho = A.grid.nodes
    return float(simpson(A.values * theta0_prime(rho), dx=A.grid.spacing))


def _cumulative(y, h):
    """
    从下标0开始的累积积分，带端点修正的梯形公式

    修正项 -h²/12·(y'(x)-y'(x₀)) 使误差为光滑的 O(h⁴)。
    """
    c = cumulative_trapezoid(y, dx=h, initial=0.0)
    dy = np.gradient(y, h, edge_order=2)
    return c - h * h / 12.0 * (dy - dy[0])


def solve_linearized(A, tol=TOL_SOLV):
    """
    求解 ℒψ = A，满足 ψ(0) = 0 的有界解

    常数变易公式:
        ψ(ρ) = θ₀'(ρ) ∫₀^ρ θ₀'(ζ)⁻² ∫_ζ^∞ A(ξ)θ₀'(ξ) dξ dζ
    内层积分在 ζ≥0 时从 +rho_max 向内累积，ζ<0 时利用可解性条件改写为
    -∫_{-rho_max}^ζ，从 -rho_max 向内累积，两侧都不会放大截断误差。

    Args:
        A (Profile): 右端项，需满足可解性条件并指数衰减
        tol (float): 可解性容差

    Returns:
        Profile: 解 ψ
    """
    solvability = check_solvability(A)
    if abs(solvability) >= tol:
        logger.error(f"右端项不满足可解性条件: {solvability:.3e}")
        raise SolvabilityViolation(solvability, tol)

    grid = A.grid
    h = grid.spacing
    mid = grid.mid
    weight = theta0_prime(grid.nodes)
    integrand = A.values * weight

    inner = np.empty(grid.n)
    inner[mid:] = _cumulative(integrand[mid:][::-1], h)[::-1]
    inner[:mid] = -_cumulative(integrand[: mid + 1], h)[:mid]

    # 先逐点相乘再积分，θ₀'⁻² 在尾部很大
    g = inner * (1.0 / (weight * weight))

    v = np.empty(grid.n)
    v[mid:] = _cumulative(g[mid:], h)
    v[: mid + 1] = -_cumulative(g[: mid + 1][::-1], h)[::-1]

    psi = weight * v
    psi[mid] = 0.0
    logger.debug(
        f"线性化方程求解完成: max|ψ| = {np.max(np.abs(psi)):.6e}, "
        f"尾部 ψ(±ρmax) = ({psi[0]:.2e}, {psi[-1]:.2e})"
    )
    return Profile(grid, psi)


def apply_linearized(psi):
    """
    离散算子 ℒψ = -ψ'' - f'(θ₀)ψ，内部节点用四阶中心差分

    Args:
        psi (Profile): 剖面

    Returns:
        np.ndarray: ℒψ，两端各两个节点为 NaN
    """
    h = psi.grid.spacing
    u = psi.values
    out = np.full(psi.grid.n, np.nan)
    d2 = (
        -u[:-4] + 16.0 * u[1:-3] - 30.0 * u[2:-2] + 16.0 * u[3:-1] - u[4:]
    ) / (12.0 * h * h)
    rho = psi.grid.nodes[2:-2]
    out[2:-2] = -d2 - eval_fprime(theta0(rho)) * u[2:-2]
    return out
