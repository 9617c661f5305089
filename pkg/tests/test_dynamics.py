#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
动力学模块测试
"""

from dataclasses import astuple

import numpy as np
import pytest

from acflow import approx, diagnostics, dynamics
from acflow.approx import lambda0
from acflow.config import parse_config
from acflow.diagnostics import gl_energy
from acflow.dynamics import (
    MultiplierKind,
    SimState,
    compute_multiplier,
    default_dt,
    dt_max,
    mean_zero_noise,
    overshoot_tolerance,
    run,
    step,
)
from acflow.errors import DegeneratePhase, OvershootAbort, SimulationAborted
from acflow.file_handler import FileHandler
from acflow.grid import Field, GridSpec, integrate
from acflow.profile1d import theta0

EPS = 0.05


@pytest.fixture
def spec():
    return GridSpec(32, 32)


@pytest.fixture
def random_field(spec):
    rng = np.random.default_rng(7)
    return Field(spec, rng.uniform(-0.9, 0.9, size=spec.shape))


def make_state(u, kind, dt=None):
    return SimState(
        u=u, time=0.0, eps=EPS, dt=dt or default_dt(EPS), kind=kind, mass0=integrate(u)
    )


SMALL_RUN = """
grid.nx = 64
grid.ny = 64
grid.Lx = 1.0
grid.Ly = 1.0
eps = 0.02
initial.kind = circle
initial.r = 0.2
fronttrack.npoints = 128
"""


class TestMultiplier:
    """乘子测试"""

    def test_from_name(self):
        """测试按名字解析乘子类型"""
        assert MultiplierKind.from_name("BB") is MultiplierKind.BB
        with pytest.raises(ValueError):
            MultiplierKind.from_name("xx")

    def test_constant_fields(self, spec):
        """测试常数场的乘子"""
        assert compute_multiplier(Field.constant(spec, 0.0), MultiplierKind.BB) == 0.0
        half = Field.constant(spec, 0.5)
        assert compute_multiplier(half, MultiplierKind.BB) == pytest.approx(0.5, rel=1e-12)
        assert compute_multiplier(half, MultiplierKind.RS) == pytest.approx(0.375, rel=1e-12)
        assert compute_multiplier(half, MultiplierKind.NONE) == 0.0

    def test_straight_interface(self):
        """测试居中直线界面的BB乘子为0"""
        s = GridSpec(64, 32, 1.0, 0.5)
        u = Field.from_function(s, lambda X, Y: theta0((X - 0.5) / 0.05))
        assert compute_multiplier(u, MultiplierKind.BB) == pytest.approx(0.0, abs=1e-8)

    def test_degenerate(self, spec):
        """测试 u ≡ 1 时BB乘子退化"""
        with pytest.raises(DegeneratePhase):
            compute_multiplier(Field.constant(spec, 1.0), MultiplierKind.BB)


class TestStep:
    """时间推进测试"""

    @pytest.mark.parametrize("kind", [MultiplierKind.BB, MultiplierKind.RS])
    def test_mass_conservation(self, random_field, kind):
        """测试离散质量守恒到舍入误差"""
        state = make_state(random_field, kind)
        for _ in range(10):
            state = step(state)
        assert abs(integrate(state.u) - state.mass0) <= 1e-12 * max(1.0, abs(state.mass0))

    def test_energy_decrease(self, random_field):
        """测试无约束方程的能量下降"""
        state = make_state(random_field, MultiplierKind.NONE)
        energy0 = gl_energy(state.u, EPS)
        for _ in range(5):
            state = step(state)
        assert gl_energy(state.u, EPS) < energy0

    @pytest.mark.parametrize("kind", [MultiplierKind.RS, MultiplierKind.NONE])
    def test_fixed_point(self, spec, kind):
        """测试 u ≡ 1 是不动点"""
        state = step(make_state(Field.constant(spec, 1.0), kind))
        assert np.allclose(state.u.values, 1.0, atol=1e-12)
        assert state.time == pytest.approx(default_dt(EPS))

    def test_odd_symmetry(self, random_field):
        """测试 u → -u 的对称性"""
        plus = step(make_state(random_field, MultiplierKind.BB))
        minus = step(make_state(random_field.with_values(-random_field.values), MultiplierKind.BB))
        assert np.allclose(plus.u.values, -minus.u.values, atol=1e-13)
        assert plus.lambda_last == pytest.approx(-minus.lambda_last, abs=1e-14)

    def test_overshoot(self, spec):
        """测试 max|u| 超出上限时中止"""
        with pytest.raises(OvershootAbort):
            step(make_state(Field.constant(spec, 1.002), MultiplierKind.NONE))

    def test_rs_tolerance(self):
        """测试RS的过冲容差随乘子放宽"""
        assert overshoot_tolerance(0.01, MultiplierKind.BB) == pytest.approx(1e-3)
        assert overshoot_tolerance(-0.01, MultiplierKind.RS) == pytest.approx(6e-3)

    def test_invalid_dt(self, random_field):
        """测试超过 0.2ε² 的时间步长"""
        with pytest.raises(ValueError):
            make_state(random_field, MultiplierKind.BB, dt=1.5 * dt_max(EPS))


class TestNoise:
    """初始扰动测试"""

    def test_zero_mean(self):
        """测试扰动零均值且幅值正确"""
        phi = mean_zero_noise((16, 16), 0.1, 3)
        assert abs(phi.mean()) < 1e-15
        assert np.max(np.abs(phi)) == pytest.approx(0.1)
        assert np.array_equal(phi, mean_zero_noise((16, 16), 0.1, 3))

    def test_no_noise(self):
        """测试幅值为0"""
        assert not mean_zero_noise((8, 8), 0.0, 0).any()


class TestRun:
    """完整模拟测试"""

    def test_tmax_zero(self):
        """测试 tmax = 0 时只有一条记录和一个快照"""
        config = parse_config(SMALL_RUN + "tmax = 0\n")
        result = run(config)
        assert len(result.records) == 1
        assert len(result.snapshots) == 1
        record = result.records[0]
        assert record.step == 0
        assert record.levelset_count == 1
        assert record.area_levelset == pytest.approx(np.pi * 0.04, rel=2e-2)

    def test_mass_conserved(self):
        """测试BB模拟的质量守恒"""
        config = parse_config(SMALL_RUN + "tmax = 2e-4\nrecord_stride = 1\n")
        result = run(config)
        assert len(result.records) == 6
        masses = np.array([r.mass for r in result.records])
        assert np.max(np.abs(masses - masses[0])) <= 1e-12
        assert result.records[-1].time == pytest.approx(2e-4)
        assert np.isfinite(result.records[-1].l2_err_approx)

    def test_aborted(self):
        """测试过冲时抛出带部分结果的 SimulationAborted"""
        config = parse_config(SMALL_RUN + "tmax = 2e-4\ninitial.noise = 0.5\ninitial.seed = 1\n")
        with pytest.raises(SimulationAborted) as info:
            run(config)
        assert info.value.step == 1
        assert isinstance(info.value.cause, OvershootAbort)
        assert len(info.value.partial.records) == 1

    def test_deterministic(self):
        """测试相同配置的两次模拟结果完全一致"""
        config = parse_config(SMALL_RUN + "tmax = 1.2e-4\nmultiplier = rs\n")
        first = run(config)
        second = run(config)
        rows = lambda result: np.array([astuple(r) for r in result.records], dtype=float)
        np.testing.assert_array_equal(rows(first), rows(second))
        assert np.array_equal(first.final.values, second.final.values)

    def test_initial_from_file(self, tmp_path):
        """测试从快照文件读入的初值按位不变"""
        source = run(parse_config(SMALL_RUN + "tmax = 0\n"))
        _, u0 = source.snapshots[0]
        path = tmp_path / "snapshot_00000.pfs"
        FileHandler().write_snapshot(str(path), u0, 0.0, 0.02)

        config = parse_config(SMALL_RUN + f"tmax = 0\ninitial.kind = file\ninitial.path = {path}\n")
        result = run(config)
        assert np.array_equal(result.snapshots[0][1].values, u0.values)
        assert result.records[0].mass == source.records[0].mass

    def test_none_shrinks(self):
        """测试无约束时圆的面积单调减小"""
        config = parse_config(SMALL_RUN + "multiplier = none\ntmax = 8e-4\nrecord_stride = 5\n")
        areas = [r.area_levelset for r in run(config).records]
        assert len(areas) == 5
        assert all(b < a for a, b in zip(areas, areas[1:]))

    def test_distance_shared(self, monkeypatch):
        """测试每个记录时刻只计算一次距离场"""
        calls = {"dynamics": 0, "approx": 0, "diagnostics": 0}

        def counting(name, func):
            def wrapper(*args, **kwargs):
                calls[name] += 1
                return func(*args, **kwargs)

            return wrapper

        monkeypatch.setattr(dynamics, "distance_data", counting("dynamics", dynamics.distance_data))
        monkeypatch.setattr(approx, "distance_data", counting("approx", approx.distance_data))
        monkeypatch.setattr(
            diagnostics, "distance_field", counting("diagnostics", diagnostics.distance_field)
        )
        result = run(parse_config(SMALL_RUN + "tmax = 2e-4\nrecord_stride = 1\n"))
        assert calls["dynamics"] == len(result.records) == 6
        # 只有组装器初始化时的一次
        assert calls["approx"] == 1
        assert calls["diagnostics"] == 0
        assert all(np.isfinite(r.l2_err_approx) for r in result.records)

    def test_bb_lambda_bound(self):
        """测试BB乘子列满足 |ελ̂| ≤ 2ελ₀ + 0.1ε"""
        eps = 0.02
        config = parse_config(
            SMALL_RUN + "grid.nx = 128\ngrid.ny = 128\ntmax = 2e-4\nrecord_stride = 1\n"
        )
        result = run(config)
        bound = 2 * eps * lambda0(result.flow.curve_at(0.0)) + 0.1 * eps
        assert len(result.records) == 6
        assert all(abs(r.lambda_) <= bound for r in result.records)
        assert all(r.lambda_ > 0 for r in result.records)

    def test_without_reference(self):
        """测试关闭参考比较时不运行前沿追踪且误差列为NaN"""
        config = parse_config(SMALL_RUN + "tmax = 2e-4\ndiagnostics.reference = false\n")
        result = run(config)
        assert len(result.flow) == 1
        assert all(np.isnan(r.l2_err_step) and np.isnan(r.l2_err_approx) for r in result.records)
        assert np.isfinite(result.records[-1].area_levelset)
