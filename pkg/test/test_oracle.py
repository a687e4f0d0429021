# -*- coding: utf-8 -*-
'''
测试预言量: S0、预言风险、有效维数、极小点、噪声水平分类与信号拆分
'''

import itertools
import logging
import math
import os
import sys

import numpy as np
import pytest

# 添加项目根目录到路径
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from sensing.oracle import (
    above_noise_support,
    effective_dimension,
    k_minimizer,
    noise_regime_classify,
    oracle_quantities,
    oracle_risk,
    restrict,
    s_bar,
    split_signal,
)
from utils.exceptions import DimensionMismatch, InvalidParameter, SupportViolation
from utils.protocol import NoiseRegime
from utils.rng import make_generator

# 配置日志
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

EXAMPLE = np.array([2.0, 0.5, 0.0])


def test_above_noise_support():
    """测试 S0 的阈值与边界"""
    assert above_noise_support(EXAMPLE, 1.0).tolist() == [0]
    assert above_noise_support(np.zeros(4), 1.0).size == 0
    assert above_noise_support(np.array([0.3, -1.0, 0.9]), 1.0).tolist() == [1]
    with pytest.raises(InvalidParameter):
        above_noise_support(EXAMPLE, 0.0)


def test_oracle_risk():
    """测试 K(xi, x)"""
    dense = np.array([1.0, -2.0, 0.5])
    assert oracle_risk(dense, dense, 1.0) == pytest.approx(3.0)
    assert oracle_risk(np.zeros(3), dense, 1.0) == pytest.approx(float(dense @ dense))
    assert oracle_risk(restrict(EXAMPLE, [0]), EXAMPLE, 1.0) == pytest.approx(1.25)
    with pytest.raises(DimensionMismatch):
        oracle_risk(np.zeros(2), dense, 1.0)


def test_effective_dimension():
    """测试有效维数"""
    assert effective_dimension(EXAMPLE, 1.0) == pytest.approx(1.25)
    assert effective_dimension(np.zeros(5), 1.0) == 0.0
    large = np.array([3.0, -1.0, 0.0, 7.0])
    assert effective_dimension(large, 1.0) == pytest.approx(3.0)


def test_k_minimizer_identity():
    """测试 K(x_{S0}, x) = sigma^2 tau 且为全部候选中的最小值"""
    rng = make_generator(17)
    for _ in range(50):
        x = rng.standard_normal(6) * rng.choice([0.3, 1.0, 3.0], size=6)
        sigma = float(rng.uniform(0.2, 2.0))
        best = k_minimizer(x, sigma)
        value = oracle_risk(best, x, sigma)
        assert value == pytest.approx(sigma ** 2 * effective_dimension(x, sigma))
        for size in range(x.size + 1):
            for subset in itertools.combinations(range(x.size), size):
                assert value <= oracle_risk(restrict(x, subset), x, sigma) + 1e-12


def test_s_bar():
    """测试 s_bar"""
    assert s_bar(EXAMPLE, 1.0) == 1
    assert s_bar(np.zeros(3), 1.0) == 0
    assert s_bar(np.array([2.0, 3.0, -4.0, 0.1]), 1.0) == 3
    rng = make_generator(81)
    for _ in range(50):
        x = rng.standard_normal(12)
        sigma = float(rng.uniform(0.1, 2.0))
        assert s_bar(x, sigma) == above_noise_support(x, sigma).size


def test_noise_regime_high():
    """测试高噪声分类"""
    assert noise_regime_classify(np.array([2.0, -3.0, 0.0, 0.0]), 1.0, 2) == NoiseRegime.HIGH
    assert noise_regime_classify(np.zeros(4), 1.0, 1) == NoiseRegime.HIGH


def test_noise_regime_low():
    """测试低噪声分类"""
    sigma = 0.5
    x = np.array([2 * sigma, 2 * sigma, 2 * sigma, 0.0, 0.0])
    assert noise_regime_classify(x, sigma, 1) == NoiseRegime.LOW


def test_noise_regime_medium():
    """测试中等噪声分类"""
    x = np.full(5, 0.9)
    assert noise_regime_classify(x, 1.0, 1) == NoiseRegime.MEDIUM


def test_noise_regime_rejects_bad_s_star():
    """测试 s* 须为正整数"""
    with pytest.raises(InvalidParameter):
        noise_regime_classify(EXAMPLE, 1.0, 0)
    with pytest.raises(InvalidParameter):
        noise_regime_classify(EXAMPLE, 1.0, 1.5)


def test_split_signal():
    """测试 x = x_{S0} + x_{S \\ S0} 与两个尾部范数"""
    sigma = 0.7
    x = EXAMPLE * sigma
    split = split_signal(x, sigma, [0, 1])
    assert np.allclose(split.x1, [2 * sigma, 0.0, 0.0])
    assert np.allclose(split.x2, [0.0, 0.5 * sigma, 0.0])
    assert split.l1_x2 == pytest.approx(0.5 * sigma)
    assert split.l2_x2 == pytest.approx(0.5 * sigma)
    assert split.l1_check and split.l2_check
    assert split.l2_x2 <= sigma * math.sqrt(1.25)


def test_split_signal_edge_cases():
    """测试全部超过噪声与零信号"""
    split = split_signal(np.array([3.0, -2.0]), 1.0, [0, 1])
    assert np.all(split.x2 == 0.0)
    assert split.l1_x2 == 0.0 and split.l2_x2 == 0.0

    split = split_signal(np.zeros(3), 1.0, [])
    assert np.all(split.x1 == 0.0) and np.all(split.x2 == 0.0)


def test_split_signal_support_violation():
    """测试信号支撑不在 S 内时报错"""
    with pytest.raises(SupportViolation):
        split_signal(EXAMPLE, 1.0, [1, 2])


def test_oracle_quantities():
    """测试汇总结果"""
    quantities = oracle_quantities(EXAMPLE, 1.0)
    assert list(quantities.s0) == [0]
    assert quantities.k_value == pytest.approx(1.25)
    assert quantities.tau == pytest.approx(1.25)
    assert quantities.s_star == 2
    assert quantities.s_bar == 1
    assert quantities.regime == NoiseRegime.HIGH
    assert quantities.model_dump()["s0"] == [0]

    assert oracle_quantities(np.zeros(3), 1.0).s_star == 1


if __name__ == "__main__":
    test_above_noise_support()
    test_oracle_risk()
    test_effective_dimension()
    test_k_minimizer_identity()
    test_s_bar()
    test_noise_regime_high()
    test_noise_regime_low()
    test_noise_regime_medium()
    test_noise_regime_rejects_bad_s_star()
    test_split_signal()
    test_split_signal_edge_cases()
    test_split_signal_support_violation()
    test_oracle_quantities()
