# -*- coding: utf-8 -*-
'''
实验用信号模型
'''

import logging

import numpy as np

from utils.exceptions import InvalidParameter
from utils.protocol import SignalKind, SignalSpec
from utils.registry import Registry

# 配置日志
logger = logging.getLogger(__name__)

SignalModels = Registry()


def _random_support(n: int, s: int, rng: np.random.Generator) -> np.ndarray:
    if not 0 <= s <= n:
        raise InvalidParameter(f"s 必须位于 [0, {n}]: {s}")
    return np.sort(rng.choice(n, size=s, replace=False))


@SignalModels.register(str(SignalKind.RADEMACHER_SUPPORT))
def rademacher_support(n: int, s: int, rng: np.random.Generator, amplitude: float = 1.0, **_) -> np.ndarray:
    """
    均匀随机的 s 元支撑集，取值 ±amplitude
    """
    x = np.zeros(n)
    support = _random_support(n, s, rng)
    x[support] = amplitude * rng.choice([-1.0, 1.0], size=support.size)
    return x


@SignalModels.register(str(SignalKind.GAUSSIAN_SUPPORT))
def gaussian_support(n: int, s: int, rng: np.random.Generator, amplitude: float = 1.0, **_) -> np.ndarray:
    """
    均匀随机的 s 元支撑集，取值 N(0, amplitude^2)
    """
    x = np.zeros(n)
    support = _random_support(n, s, rng)
    x[support] = amplitude * rng.standard_normal(support.size)
    return x


@SignalModels.register(str(SignalKind.POWER_DECAY))
def power_decay(n: int, s: int, rng: np.random.Generator, amplitude: float = 1.0,
                exponent: float = 1.0, **_) -> np.ndarray:
    """
    非稀疏信号: 排序后的幅值为 amplitude * j^{-exponent}，位置随机排列、符号随机
    """
    if not exponent > 0:
        raise InvalidParameter(f"exponent 必须为正: {exponent}")
    magnitudes = amplitude * np.arange(1, n + 1, dtype=float) ** (-exponent)
    signs = rng.choice([-1.0, 1.0], size=n)
    x = np.empty(n)
    x[rng.permutation(n)] = magnitudes * signs
    return x


def draw_signal(spec: SignalSpec, n: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """
    按信号模型抽取信号

    参数:
        spec: 信号模型
        n: 维数
        s: 稀疏度（power_decay 忽略）
        rng: 随机数发生器

    返回:
        长度为 n 的向量
    """
    draw = SignalModels.require(str(spec.kind))
    return draw(n, s, rng, amplitude=spec.amplitude, exponent=spec.exponent)
