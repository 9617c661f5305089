#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
异常模块 - 定义求解器和诊断工具使用的异常类型
"""


class AcflowError(Exception):
    """所有acflow异常的基类"""


class ConfigError(AcflowError, ValueError):
    """配置错误，key为出错的配置键(点号路径)"""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"配置项 '{key}': {message}")


class SolvabilityViolation(AcflowError, ValueError):
    """右端项不满足可解性条件 ∫Aθ₀′ = 0"""

    def __init__(self, value, tol):
        self.value = value
        super().__init__(f"可解性积分 {value:.3e} 超过容差 {tol:.1e}")


class SolverDivergence(AcflowError, RuntimeError):
    """Helmholtz求解残差未达到目标"""

    def __init__(self, residual, target):
        self.residual = residual
        super().__init__(f"Helmholtz残差 {residual:.3e} 超过目标 {target:.3e}")


class DegeneratePhase(AcflowError, ValueError):
    """序参量几乎处处为 ±1，BB乘子的分母退化"""


class OvershootAbort(AcflowError, RuntimeError):
    """max|u| 超过 1 + tol_overshoot"""

    def __init__(self, max_abs, tol):
        self.max_abs = max_abs
        super().__init__(
            f"max|u| = {max_abs:.6f} 超过 1 + {tol:g}，请减小时间步长 dt"
        )


class CurveTouchesBoundary(AcflowError, ValueError):
    """曲线与区域边界的距离不足"""


class MalformedCurve(AcflowError, ValueError):
    """曲线点数不足或面积为零"""


class DegenerateTriple(AcflowError, ValueError):
    """曲率计算中相邻顶点重合"""


class SelfIntersection(AcflowError, RuntimeError):
    """前沿追踪得到的曲线自相交"""

    def __init__(self, time, message="曲线自相交"):
        self.time = time
        super().__init__(f"t = {time:.6g}: {message}")


class FlowCollapse(AcflowError, RuntimeError):
    """曲线收缩到顶点数下限以下"""

    def __init__(self, time, message="曲线收缩消失"):
        self.time = time
        super().__init__(f"t = {time:.6g}: {message}")


class EigSolverStall(AcflowError, RuntimeError):
    """特征值求解器在迭代预算内未收敛"""


class SimulationAborted(AcflowError, RuntimeError):
    """模拟中止，保存出错的步数和已得到的部分结果"""

    def __init__(self, step, time, cause, partial=None):
        self.step = step
        self.time = time
        self.cause = cause
        self.partial = partial
        super().__init__(f"第 {step} 步 (t = {time:.6g}) 中止: {cause}")
