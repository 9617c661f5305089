#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
近似解模块 - 二阶匹配渐近近似解 u_k 与近似乘子 λ_k 的组装

内层解 u^in = θ₀(d/ε) + ε²b₁ψ̂(d/ε)，外层解 u^out = sign(d)，二者用截断函数 ζ 拼接，
最后加一个只依赖时间的常数使质量守恒。h₁ ≡ 0，λ₁ ≡ 0，u₁ ≡ 0。
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .fronttrack import average_curvature, curvature
from .geometry import check_clearance, distance_data
from .grid import Field, laplacian
from .potential import eval_f, eval_sqrt4W
from .profile1d import (
    SQRT2,
    Profile,
    RhoGrid,
    profile_constants,
    sample,
    solve_linearized,
    theta0,
    theta0_prime,
)

# 获取日志记录器
logger = logging.getLogger("acflow.approx")

SUPPORTED_ORDERS = (0, 2)


@dataclass(frozen=True)
class U2Kernel:
    """
    二阶修正的核 ψ̂：ℒψ̂ = -ρθ₀'，ψ̂(0) = 0

    u₂(ρ,s,t) = b₁(s,t)·ψ̂(ρ)，b₁ = -∂_dΔd 在 Γ 上的值(二维时为 κ²)。
    """

    psi_hat: Profile

    def __post_init__(self):
        grid = self.psi_hat.grid
        spline = CubicSpline(grid.nodes, self.psi_hat.values)
        object.__setattr__(self, "_spline", spline)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        inside = np.abs(rho) <= self.psi_hat.grid.rho_max
        return np.where(inside, self._spline(rho), 0.0)


@lru_cache(maxsize=4)
def build_u2_kernel(grid=None):
    """
    构造并缓存 ψ̂ = solve_linearized(-ρθ₀')

    右端项 -ρθ₀' 是奇函数，可解性积分 ∫ρθ₀'² = 0。

    Returns:
        U2Kernel: 二阶修正核
    """
    grid = grid or RhoGrid()
    rhs = sample(lambda rho: -rho * theta0_prime(rho), grid)
    kernel = U2Kernel(solve_linearized(rhs))
    logger.info(
        f"二阶修正核构造完成: max|ψ̂| = {np.max(np.abs(kernel.psi_hat.values)):.6f}"
    )
    return kernel


def lambda0(curve):
    """
    零阶乘子 λ₀ = κ̄/σ，σ = √2

    Args:
        curve (Curve): 界面曲线

    Returns:
        float: λ₀
    """
    return average_curvature(curve) / SQRT2


def cutoff(d, eps):
    """
    截断函数 ζ(d)

    |d| ≤ √ε 时为1，|d| ≥ 2√ε 时为0，中间用C²五次光滑阶跃过渡，
    满足 |dζ'(d)| ≤ 15/4。
    """
    r = np.sqrt(eps)
    s = np.clip((np.abs(d) - r) / r, 0.0, 1.0)
    return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)


@dataclass(frozen=True)
class ApproxSpec:
    """
    近似解的参数

    Args:
        eps (float): 界面厚度参数 ε
        order (int): 展开阶数，0 或 2
        flow (FlowHistory): 界面族 Γ_t(前沿追踪结果)
    """

    eps: float
    order: int
    flow: object

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError(f"eps 必须为正: {self.eps}")
        if self.order not in SUPPORTED_ORDERS:
            raise ValueError(f"近似阶数必须是 0 或 2: {self.order}")

    @property
    def inner_radius(self):
        return float(np.sqrt(self.eps))

    @property
    def outer_radius(self):
        return 2.0 * float(np.sqrt(self.eps))


@dataclass(frozen=True)
class ApproxField:
    """组装结果: 近似解、近似乘子、质量修正常数及所用曲线"""

    u: Field
    lambda_k: float
    shift: float
    curve: object


class ApproxBuilder:
    """近似解组装器，缓存 t = 0 时的参考质量"""

    def __init__(self, spec, grid):
        """
        初始化组装器

        Args:
            spec (ApproxSpec): 近似解参数
            grid (GridSpec): 网格
        """
        self.spec = spec
        self.grid = grid
        self.kernel = build_u2_kernel() if spec.order == 2 else None
        u0, _ = self._assemble(0.0)
        self.mass0 = float(np.sum(u0)) * grid.hx * grid.hy
        logger.debug(
            f"初始化近似解组装器: eps={spec.eps}, order={spec.order}, "
            f"网格 {grid.nx}×{grid.ny}, 参考质量 {self.mass0:.12f}"
        )

    def _assemble(self, t, distance=None):
        """组装质量修正之前的 u*，返回 (数组, 曲线)。distance 为已算好的 distance_data 结果"""
        spec = self.spec
        eps = spec.eps
        curve = spec.flow.curve_at(t)
        check_clearance(
            curve, self.grid, margin=max(spec.outer_radius, 4.0 * max(self.grid.hx, self.grid.hy))
        )
        d, seg, frac = distance_data(curve, self.grid) if distance is None else distance
        rho = d / eps
        u_in = theta0(rho)
        if spec.order == 2:
            kappa = curvature(curve)
            k_s = (1.0 - frac) * kappa[seg] + frac * kappa[(seg + 1) % len(kappa)]
            u_in = u_in + eps * eps * (k_s * k_s) * self.kernel(rho)
        u_out = np.where(d < 0.0, -1.0, 1.0)
        zeta = cutoff(d, eps)
        return zeta * u_in + (1.0 - zeta) * u_out, curve

    def build(self, t, distance=None):
        """
        组装 t 时刻的近似解

        Args:
            t (float): 时间，需在界面族的时间范围内
            distance (tuple, optional): 同一曲线的 (符号距离, 最近边下标, 边上参数)

        Returns:
            ApproxField: u_k、λ_k 以及质量修正常数
        """
        u_star, curve = self._assemble(t, distance)
        mass = float(np.sum(u_star)) * self.grid.hx * self.grid.hy
        shift = 0.0 if t == 0.0 else (self.mass0 - mass) / self.grid.area
        u = Field(self.grid, u_star + shift)
        return ApproxField(u=u, lambda_k=lambda0(curve), shift=shift, curve=curve)


def build_approx_field(spec, t, grid):
    """
    组装 t 时刻的近似解 u_k 和近似乘子 λ_k

    Args:
        spec (ApproxSpec): 近似解参数
        t (float): 时间
        grid (GridSpec): 网格

    Returns:
        tuple: (Field, float)
    """
    result = ApproxBuilder(spec, grid).build(t)
    return result.u, result.lambda_k


def alpha_beta(curve):
    """
    A_k ≈ ε²α 与 B_k ≈ εβ 中的系数

    α = (∫κ ds)·∫ρf(θ₀)dρ，β = 2√2·L(参数域取弧长)

    Args:
        curve (Curve): 界面曲线

    Returns:
        dict: {"alpha": α, "beta": β}
    """
    length = curve.perimeter()
    int_kappa = average_curvature(curve) * length
    alpha = int_kappa * profile_constants().int_rho_f
    beta = 2.0 * SQRT2 * length
    return {"alpha": float(alpha), "beta": float(beta)}


def residual_field(builder, t, dt):
    """
    用网格的离散算子计算近似解代入BB方程后的残差

    δ = ∂_t u - Δ_h u - ε⁻²(f(u) - ελ_k√(4W(u)))，时间导数用差分 (t-dt, t+dt)。

    Args:
        builder (ApproxBuilder): 近似解组装器
        t (float): 时间
        dt (float): 时间差分步长

    Returns:
        Field: 残差
    """
    eps = builder.spec.eps
    current = builder.build(t)
    u = current.u
    t_lo = max(t - dt, 0.0)
    t_hi = t + dt
    if builder.spec.flow.covers(t_hi):
        u_hi = builder.build(t_hi).u.values
    else:
        u_hi, t_hi = u.values, t
    u_lo = builder.build(t_lo).u.values if t_lo < t else u.values
    dudt = (u_hi - u_lo) / (t_hi - t_lo) if t_hi > t_lo else np.zeros_like(u.values)
    reaction = eval_f(u.values) - eps * current.lambda_k * eval_sqrt4W(u.values)
    delta = dudt - laplacian(u).values - reaction / (eps * eps)
    return Field(u.spec, delta)


def radial_residual(eps, radius, order=2, drho=0.005):
    """
    静止圆周上的残差，沿半径方向用精细网格和四阶差分计算

    只在内层 |d| ≤ √ε 内计算，此处 ζ = 1，且圆是平衡态，质量修正为0，
    因此残差只反映截断展开的误差。

    Args:
        eps (float): ε
        radius (float): 圆半径
        order (int): 近似阶数 0 或 2
        drho (float): ρ 方向的差分步长

    Returns:
        float: 内层残差的最大模
    """
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"近似阶数必须是 0 或 2: {order}")
    kappa = 1.0 / radius
    lam = kappa / SQRT2
    half = 1.0 / np.sqrt(eps)
    n = int(np.ceil(half / drho))
    rho = drho * np.arange(-n - 2, n + 3, dtype=float)
    u = theta0(rho)
    if order == 2:
        u = u + eps * eps * kappa * kappa * build_u2_kernel()(rho)
    h = eps * drho
    r = radius + eps * rho
    u_r = (u[:-4] - 8.0 * u[1:-3] + 8.0 * u[3:-1] - u[4:]) / (12.0 * h)
    u_rr = (-u[:-4] + 16.0 * u[1:-3] - 30.0 * u[2:-2] + 16.0 * u[3:-1] - u[4:]) / (
        12.0 * h * h
    )
    uc = u[2:-2]
    lap = u_rr + u_r / r[2:-2]
    reaction = eval_f(uc) - eps * lam * eval_sqrt4W(uc)
    delta = -lap - reaction / (eps * eps)
    return float(np.max(np.abs(delta)))
