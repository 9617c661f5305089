#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
网格模块测试
"""

import numpy as np
import pytest

from acflow.grid import (
    Field,
    GridSpec,
    gradient_squared,
    helmholtz_solve,
    integrate,
    laplacian,
    laplacian_matrix,
)


@pytest.fixture
def spec():
    return GridSpec(24, 16, 1.5, 1.0)


@pytest.fixture
def random_field(spec):
    rng = np.random.default_rng(7)
    return Field(spec, rng.uniform(-1, 1, spec.shape))


class TestGridSpec:
    """网格描述测试"""

    def test_spacing(self, spec):
        """测试步长、面积和数组形状"""
        assert spec.hx == pytest.approx(1.5 / 24)
        assert spec.hy == pytest.approx(1.0 / 16)
        assert spec.area == pytest.approx(1.5)
        assert spec.shape == (16, 24)

    def test_cell_centers(self, spec):
        """测试单元中心坐标"""
        X, Y = spec.cell_centers()
        assert X.shape == spec.shape
        assert X[0, 0] == pytest.approx(0.5 * spec.hx)
        assert Y[-1, 0] == pytest.approx(spec.Ly - 0.5 * spec.hy)

    def test_invalid(self):
        """测试非法网格"""
        with pytest.raises(ValueError):
            GridSpec(4, 16)
        with pytest.raises(ValueError):
            GridSpec(16, 16, Lx=0.0)
        with pytest.raises(ValueError):
            GridSpec(2048, 2048)


class TestField:
    """离散场测试"""

    def test_read_only(self, random_field):
        """测试场的值不可修改"""
        with pytest.raises(ValueError):
            random_field.values[0, 0] = 1.0

    def test_shape_and_finite(self, spec):
        """测试形状检查和非有限值检查"""
        with pytest.raises(ValueError):
            Field(spec, np.zeros(10))
        bad = np.zeros(spec.shape)
        bad[0, 0] = np.nan
        with pytest.raises(ValueError):
            Field(spec, bad)

    def test_constructors(self, spec):
        """测试常数场和函数采样"""
        assert Field.constant(spec, 2.0).mean() == 2.0
        f = Field.from_function(spec, lambda X, Y: X + 0 * Y)
        assert f.values[0, 1] == pytest.approx(1.5 * spec.hx)
        assert f.max_abs() == pytest.approx(spec.Lx - 0.5 * spec.hx)


class TestLaplacian:
    """拉普拉斯算子与Helmholtz求解测试"""

    def test_constant_null_space(self, spec):
        """测试常数场的拉普拉斯为零"""
        assert np.all(laplacian(Field.constant(spec, 3.0)).values == 0.0)

    def test_zero_sum(self, random_field):
        """测试离散散度定理: Σ Δ_h u = 0"""
        lap = laplacian(random_field).values
        assert abs(np.sum(lap)) < 1e-10 * np.max(np.abs(lap)) * lap.size

    def test_second_order_accuracy(self):
        """测试满足Neumann条件的光滑场上的二阶精度"""
        errors = []
        for n in (32, 64):
            s = GridSpec(n, n)
            u = Field.from_function(s, lambda X, Y: np.cos(np.pi * X) * np.cos(2 * np.pi * Y))
            exact = -5 * np.pi**2 * u.values
            errors.append(np.max(np.abs(laplacian(u).values - exact)[2:-2, 2:-2]))
        assert errors[1] < errors[0] / 3.5

    def test_matrix_matches_stencil(self, random_field):
        """测试稀疏矩阵与模板一致且对称"""
        spec = random_field.spec
        M = laplacian_matrix(spec)
        applied = (M @ random_field.values.ravel()).reshape(spec.shape)
        assert np.allclose(applied, -laplacian(random_field).values, atol=1e-10)
        assert abs(M - M.T).max() == 0.0

    def test_helmholtz(self, random_field):
        """测试Helmholtz求解的残差和均值保持"""
        tau = 0.01
        v = helmholtz_solve(random_field, tau)
        residual = v.values - tau * laplacian(v).values - random_field.values
        assert np.max(np.abs(residual)) < 1e-10
        assert v.mean() == pytest.approx(random_field.mean(), abs=1e-15)

    def test_cosine_eigenvalue(self, spec):
        """测试 cos(πx/Lx) 是离散算子的特征函数"""
        mu = (2.0 - 2.0 * np.cos(np.pi * spec.hx / spec.Lx)) / spec.hx**2
        u = Field.from_function(spec, lambda X, Y: np.cos(np.pi * X / spec.Lx) + 0 * Y)
        assert np.max(np.abs(laplacian(u).values + mu * u.values)) < 1e-11

    def test_helmholtz_eigenfunction(self, spec):
        """测试对特征函数的Helmholtz求解为 g/(1 + tau·μ)"""
        tau = 0.05
        mu = (2.0 - 2.0 * np.cos(np.pi * spec.hx / spec.Lx)) / spec.hx**2
        g = Field.from_function(spec, lambda X, Y: np.cos(np.pi * X / spec.Lx) + 0 * Y)
        v = helmholtz_solve(g, tau)
        assert np.max(np.abs(v.values - g.values / (1.0 + tau * mu))) < 1e-12

    def test_helmholtz_invalid_tau(self, random_field):
        """测试非正的 tau"""
        with pytest.raises(ValueError):
            helmholtz_solve(random_field, 0.0)


class TestQuadrature:
    """积分与梯度测试"""

    def test_integrate(self, spec):
        """测试常数的积分"""
        assert integrate(Field.constant(spec, 2.0)) == pytest.approx(2.0 * spec.area)

    def test_gradient_squared(self):
        """测试线性场内部的梯度平方"""
        s = GridSpec(16, 16)
        u = Field.from_function(s, lambda X, Y: 2 * X - Y)
        g = gradient_squared(u)
        assert np.allclose(g[1:-1, 1:-1], 5.0)
        assert np.all(gradient_squared(Field.constant(s, 1.0)) == 0.0)
