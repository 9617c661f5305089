#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
势函数模块 - 三次双稳态非线性项 f 与双阱势 W

f(u) = u(1-u²),  W(u) = (1-u²)²/4,  f = -W'
所有函数既接受标量也接受numpy数组。
"""

import numpy as np


def eval_f(u):
    """双稳态非线性项 f(u) = u(1-u²)"""
    return u * (1.0 - u * u)


def eval_W(u):
    """双阱势 W(u) = (1-u²)²/4，恒非负"""
    s = 1.0 - u * u
    return 0.25 * s * s


def eval_sqrt4W(u):
    """
    拉格朗日乘子权重 √(4W(u))

    取 |1-u²| 而不是对W开方，离散格式中 |u| 略大于1时仍有定义。
    """
    return np.abs(1.0 - u * u)


def eval_fprime(u):
    """f'(u) = 1-3u²"""
    return 1.0 - 3.0 * u * u
