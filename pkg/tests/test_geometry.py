#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
几何模块测试
"""

import numpy as np
import pytest

from acflow.errors import CurveTouchesBoundary, MalformedCurve
from acflow.geometry import (
    Curve,
    check_clearance,
    circle_curve,
    contains,
    distance_field,
    ellipse_curve,
    enclosed_area,
    extract_zero_levelset,
    largest_component,
    nearest_points,
    phase_area,
    signed_distance,
)
from acflow.grid import Field, GridSpec


@pytest.fixture
def circle():
    return circle_curve(0.5, 0.5, 0.3, 256)


@pytest.fixture
def spec():
    return GridSpec(64, 64)


class TestCurve:
    """曲线类测试"""

    def test_area_and_orientation(self, circle):
        """测试正多边形面积和定向"""
        m = len(circle)
        exact = 0.5 * m * 0.09 * np.sin(2 * np.pi / m)
        assert enclosed_area(circle) == pytest.approx(exact, rel=1e-12)
        assert circle.reversed().signed_area() == pytest.approx(-exact, rel=1e-12)
        assert circle.reversed().oriented().signed_area() > 0

    def test_perimeter(self, circle):
        """测试周长"""
        assert circle.perimeter() == pytest.approx(2 * np.pi * 0.3, rel=1e-4)

    def test_malformed(self):
        """测试非法曲线"""
        with pytest.raises(MalformedCurve):
            Curve(np.zeros((2, 2)))
        with pytest.raises(MalformedCurve):
            Curve(np.zeros((5, 3)))
        with pytest.raises(MalformedCurve):
            circle_curve(0.5, 0.5, 0.2, 8).validate()
        line = Curve(np.column_stack([np.linspace(0, 1, 20), np.zeros(20)]))
        with pytest.raises(MalformedCurve):
            line.validate()

    def test_resample(self):
        """测试按弧长重采样"""
        c = ellipse_curve(0.5, 0.5, 0.35, 0.25, 128)
        r = c.resample(200)
        assert len(r) == 200
        assert np.array_equal(r.points[0], c.points[0])
        lengths = r.segment_lengths()
        assert lengths.max() / lengths.min() < 1.05
        assert r.signed_area() == pytest.approx(c.signed_area(), rel=1e-3)

    def test_is_simple(self, circle):
        """测试自交检测"""
        assert circle.is_simple()
        t = 2 * np.pi * (np.arange(64) + 0.5) / 64
        figure_eight = Curve(np.column_stack([np.sin(t), np.sin(t) * np.cos(t)]))
        assert not figure_eight.is_simple()


class TestDistance:
    """符号距离测试"""

    def test_signed_distance(self, circle):
        """测试内部为负、外部为正"""
        assert signed_distance(circle, (0.5, 0.5)) == pytest.approx(-0.3, abs=1e-4)
        assert signed_distance(circle, (0.9, 0.5)) == pytest.approx(0.1, abs=1e-4)

    def test_nearest_points(self, circle):
        """测试最近点的边下标和参数"""
        dist, seg, frac = nearest_points(circle, np.array([[0.9, 0.5], [0.5, 0.9]]))
        assert dist[0] == pytest.approx(0.1, abs=1e-12)
        assert seg[0] in (0, len(circle) - 1)
        assert np.all((frac >= 0) & (frac <= 1))
        assert seg[1] == 64 or (seg[1] == 63 and frac[1] == pytest.approx(1.0))

    def test_contains(self, circle):
        """测试包含判断"""
        inside = contains(circle, np.array([[0.5, 0.5], [0.95, 0.95]]))
        assert list(inside) == [True, False]

    def test_distance_field(self, circle, spec):
        """测试距离场与解析值一致"""
        d = distance_field(circle, spec)
        X, Y = spec.cell_centers()
        exact = np.hypot(X - 0.5, Y - 0.5) - 0.3
        assert np.max(np.abs(d.values - exact)) < 1e-4

    def test_clearance(self, spec):
        """测试曲线靠近边界时抛出异常"""
        near = circle_curve(0.5, 0.5, 0.45, 128)
        with pytest.raises(CurveTouchesBoundary):
            distance_field(near, spec)
        assert check_clearance(circle_curve(0.5, 0.5, 0.3, 64), spec) == pytest.approx(0.2)

    def test_too_few_points(self, spec):
        """测试顶点数不足16的曲线"""
        with pytest.raises(MalformedCurve):
            distance_field(circle_curve(0.5, 0.5, 0.3, 12), spec)


class TestLevelSet:
    """零水平集测试"""

    def test_extract_circle(self):
        """测试从距离函数提取圆"""
        s = GridSpec(128, 128)
        u = Field.from_function(s, lambda X, Y: np.hypot(X - 0.5, Y - 0.5) - 0.3)
        curves = extract_zero_levelset(u)
        assert len(curves) == 1
        curve = curves[0]
        assert curve.signed_area() > 0
        assert curve.signed_area() == pytest.approx(np.pi * 0.09, rel=1e-3)
        radii = np.hypot(*(curve.points - 0.5).T)
        assert np.max(np.abs(radii - 0.3)) < 2e-3

    def test_two_components(self):
        """测试多个分量时取面积最大的一个"""
        s = GridSpec(128, 128)
        u = Field.from_function(
            s,
            lambda X, Y: np.minimum(
                np.hypot(X - 0.3, Y - 0.5) - 0.15, np.hypot(X - 0.75, Y - 0.5) - 0.08
            ),
        )
        best, count = largest_component(extract_zero_levelset(u))
        assert count == 2
        assert best.centroid()[0] == pytest.approx(0.3, abs=1e-2)

    def test_no_sign_change(self, spec):
        """测试没有变号时返回空列表"""
        assert extract_zero_levelset(Field.constant(spec, 1.0)) == []
        assert largest_component([]) == (None, 0)

    def test_open_contour_discarded(self, spec):
        """测试碰到边界的开曲线被丢弃"""
        u = Field.from_function(spec, lambda X, Y: X - 0.5)
        assert extract_zero_levelset(u) == []

    def test_phase_area(self, spec):
        """测试相区面积"""
        u = Field.from_function(spec, lambda X, Y: np.where(X < 0.25, -1.0, 1.0))
        assert phase_area(u) == pytest.approx(0.25)
