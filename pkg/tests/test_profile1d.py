#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
一维剖面模块测试
"""

import numpy as np
import pytest

from acflow.errors import SolvabilityViolation
from acflow.profile1d import (
    SQRT2,
    Profile,
    RhoGrid,
    apply_linearized,
    check_solvability,
    profile_constants,
    sample,
    solve_linearized,
    theta0,
    theta0_prime,
)


class TestRhoGrid:
    """ρ 网格测试"""

    def test_default_grid(self):
        """测试默认网格对称且包含 ρ = 0"""
        grid = RhoGrid()
        nodes = grid.nodes
        assert len(nodes) == grid.n
        assert nodes[grid.mid] == 0.0
        assert np.array_equal(nodes[::-1], -nodes)
        assert nodes[-1] == pytest.approx(grid.rho_max)

    def test_invalid_grid(self):
        """测试非法参数"""
        with pytest.raises(ValueError):
            RhoGrid(n=4000)
        with pytest.raises(ValueError):
            RhoGrid(rho_max=5.0)


class TestStandingWave:
    """驻波测试"""

    def test_ode(self):
        """测试 θ₀'' + f(θ₀) = 0 与 θ₀' 公式"""
        rho = np.linspace(-8, 8, 1601)
        h = rho[1] - rho[0]
        th = theta0(rho)
        d1 = np.gradient(th, h)
        assert np.max(np.abs(d1 - theta0_prime(rho))) < 1e-3
        d2 = (th[2:] - 2 * th[1:-1] + th[:-2]) / h**2
        assert np.max(np.abs(d2 + th[1:-1] * (1 - th[1:-1] ** 2))) < 1e-4

    def test_no_overflow(self):
        """测试尾部不溢出"""
        with np.errstate(over="raise"):
            assert theta0_prime(1000.0) == 0.0
            assert theta0(-1000.0) == -1.0


class TestProfileConstants:
    """剖面常数测试"""

    @pytest.fixture
    def constants(self):
        return profile_constants()

    def test_sigma(self, constants):
        """测试 σ = √2，σ* = (3/4)√2"""
        assert abs(constants.sigma - SQRT2) < 1e-8
        assert abs(constants.sigma_star - 0.75 * SQRT2) < 1e-8

    def test_integrals(self, constants):
        """测试 ∫θ₀' = 2，∫ρf(θ₀) = 2，能量常数 2√2/3"""
        assert abs(constants.int_theta_prime - 2.0) < 1e-8
        assert abs(constants.int_rho_f - 2.0) < 1e-8
        assert abs(constants.int_theta_prime_sq - 2 * SQRT2 / 3) < 1e-8
        assert abs(constants.c0 - 2 * SQRT2 / 3) < 1e-8


class TestLinearizedOperator:
    """线性化算子与可解性条件测试"""

    @pytest.fixture
    def psi_hat(self):
        return solve_linearized(sample(lambda r: -r * theta0_prime(r)))

    def test_solvability_integral(self):
        """测试 ∫ρθ₀'² = 0"""
        A = sample(lambda r: r * theta0_prime(r))
        assert abs(check_solvability(A)) < 1e-10

    def test_violation(self):
        """测试不满足可解性条件时抛出异常"""
        with pytest.raises(SolvabilityViolation):
            solve_linearized(sample(theta0_prime))

    def test_residual(self, psi_hat):
        """测试 ℒψ̂ + ρθ₀' 的残差"""
        rho = psi_hat.grid.nodes
        residual = apply_linearized(psi_hat) + rho * theta0_prime(rho)
        finite = np.isfinite(residual)
        assert np.count_nonzero(~finite) == 4
        assert np.max(np.abs(residual[finite])) < 1e-6

    def test_centre_and_parity(self, psi_hat):
        """测试 ψ̂(0) = 0 且 ψ̂ 为奇函数"""
        mid = psi_hat.grid.mid
        assert psi_hat.values[mid] == 0.0
        assert np.max(np.abs(psi_hat.values + psi_hat.values[::-1])) < 1e-8

    def test_bounded(self, psi_hat):
        """测试解有界且在尾部衰减"""
        assert np.max(np.abs(psi_hat.values)) < 10.0
        assert abs(psi_hat.values[0]) < 1e-8
        assert abs(psi_hat.values[-1]) < 1e-8

    def test_linearity(self, psi_hat):
        """测试解关于右端项线性"""
        scaled = solve_linearized(sample(lambda r: 3.0 * r * theta0_prime(r)))
        scale = max(1.0, np.max(np.abs(psi_hat.values)))
        assert np.max(np.abs(scaled.values + 3.0 * psi_hat.values)) < 1e-12 * scale

    def test_known_solution(self):
        """测试右端项为 ℒ(θ₀'') 时恢复 θ₀''(θ₀'' 为奇函数且 θ₀''(0) = 0)"""
        # ℒθ₀'' = f''(θ₀)θ₀'² = -6θ₀θ₀'²
        A = sample(lambda r: -6.0 * theta0(r) * theta0_prime(r) ** 2)
        psi = solve_linearized(A)
        exact = -theta0(psi.grid.nodes) * (1 - theta0(psi.grid.nodes) ** 2)
        assert np.max(np.abs(psi.values - exact)) < 1e-6

    def test_profile_interpolation(self):
        """测试剖面插值"""
        p = sample(theta0)
        assert isinstance(p, Profile)
        assert p(0.0) == pytest.approx(0.0, abs=1e-15)
        assert p(1.0) == pytest.approx(np.tanh(1 / SQRT2), abs=1e-4)
