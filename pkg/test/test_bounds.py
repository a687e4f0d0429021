# -*- coding: utf-8 -*-
'''
测试闭式误差界: 数值、适用条件、概率下界与注册表求值
'''

import logging
import math
import os
import sys

import numpy as np
import pytest

# 添加项目根目录到路径
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from sensing.bounds import (
    ZERO_MU_TEXT,
    Bounds,
    evaluate_bound,
    event_probability_floor,
    event_probability_floor_union,
    gaussian_sparse_bound,
    gaussian_width,
    high_noise_bound,
    low_noise_bound,
    minimax_expectation_lower,
    minimax_probability_lower,
    minimax_trace_floor,
    oracle_bound_general,
    oracle_bound_sparse,
    qcbp_feasibility_level,
    regularization_levels,
    s_star,
    stable_error_bound,
)
from sensing.measurement import identity_hadamard_ensemble, normalize_columns
from utils.exceptions import EmptySupport, InvalidParameter
from utils.protocol import BoundId
from utils.rng import make_generator

# 配置日志
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

LOG_128 = 7 * math.log(2.0)
WIDTH_128 = math.sqrt(2.0 * LOG_128)


def test_stable_lasso_values():
    """测试 Lasso 稳定恢复界"""
    report = stable_error_bound("lasso", 0.125, 1, 0.1, 0.0)
    assert report.theorem_id == BoundId.STABLE_LASSO
    assert report.applicable
    assert report.value == pytest.approx(3.0)

    report = stable_error_bound("lasso", 0.125, 1, 0.0, 0.2)
    assert report.value == pytest.approx(0.8)


def test_stable_lasso_not_applicable():
    """测试 mu >= 1/(4s) 与 mu = 0 时不适用"""
    report = stable_error_bound("lasso", 0.3, 1, 0.1, 0.0)
    assert not report.applicable
    assert report.value is None

    report = stable_error_bound("lasso", 0.0, 1, 0.1, 0.0)
    assert not report.applicable
    assert report.condition_text == ZERO_MU_TEXT


def test_stable_ds_and_qcbp_values():
    """测试 DS 与 QCBP 稳定恢复界"""
    report = stable_error_bound("ds", 0.1, 2, 0.05, 0.0)
    assert report.theorem_id == BoundId.STABLE_DS
    assert report.value == pytest.approx(4.0 / 0.7 * 0.05)

    report = stable_error_bound("qcbp", 0.1, 2, 0.05, 0.0)
    assert report.theorem_id == BoundId.STABLE_QCBP
    assert report.value == pytest.approx(2.0 * math.sqrt(2.0) * math.sqrt(1.1) / 0.7 * 0.05)

    # mu = 1/(2s-1) 处条件取严格不等号
    assert not stable_error_bound("ds", 1.0 / 3.0, 2, 0.05, 0.0).applicable


def test_stable_bound_rejects_bad_inputs():
    """测试非法参数"""
    with pytest.raises(InvalidParameter):
        stable_error_bound("ds", 1.5, 2, 0.05, 0.0)
    with pytest.raises(InvalidParameter):
        stable_error_bound("ds", 0.1, 0, 0.05, 0.0)
    with pytest.raises(InvalidParameter):
        stable_error_bound("ds", 0.1, 2, -0.05, 0.0)
    with pytest.raises(InvalidParameter):
        stable_error_bound("bp", 0.1, 2, 0.05, 0.0)


def test_gaussian_sparse_bound():
    """测试高斯噪声下的平方误差界"""
    report = gaussian_sparse_bound("ds", 0.1, 2, 1.0, 100)
    assert report.value == pytest.approx(300.75, rel=1e-4)
    assert report.probability == pytest.approx(event_probability_floor(100))

    report = gaussian_sparse_bound("lasso", 0.125, 1, 1.0, 128)
    assert report.value == pytest.approx(32.0 * LOG_128 / 0.0625 ** 2)
    assert report.value == pytest.approx(39747.8, rel=1e-5)


def test_event_probability_floor():
    """测试事件概率下界"""
    assert event_probability_floor(128) == pytest.approx(0.87193, abs=1e-4)
    assert event_probability_floor(100) == pytest.approx(0.86853, abs=1e-4)
    assert event_probability_floor(2) == pytest.approx(1.0 - 1.0 / (2.0 * math.sqrt(math.pi * math.log(2.0))))
    with pytest.raises(InvalidParameter):
        event_probability_floor(1)


def test_event_probability_floor_union():
    """测试双侧并集界低于陈述的下界"""
    assert event_probability_floor_union(128) == pytest.approx(1.0 - 1.0 / math.sqrt(math.pi * LOG_128))
    for n in (2, 16, 128, 1024):
        assert event_probability_floor_union(n) < event_probability_floor(n)


def test_minimax_expectation_lower():
    """测试期望风险下界"""
    assert minimax_expectation_lower(0.7, 1, 1.0).value == pytest.approx(1.0)
    assert minimax_expectation_lower(0.125, 2, 1.0).value == pytest.approx(2.0 / 1.125)
    assert minimax_expectation_lower(0.0, 5, 2.0).value == pytest.approx(20.0)


def test_minimax_probability_lower():
    """测试高概率平方误差下界"""
    report = minimax_probability_lower(0.0, 1, 1.0, 16)
    assert report.value == pytest.approx(8.0)
    assert report.probability == pytest.approx(1.0 - math.exp(-1.0))

    assert minimax_probability_lower(0.125, 2, 1.0, 4).value == pytest.approx(4.0 / 1.125)

    floors = [minimax_probability_lower(0.0, 1, 1.0, n).probability for n in (16, 32, 64, 128)]
    assert all(a < b for a, b in zip(floors, floors[1:]))


def test_minimax_trace_floor_orthonormal():
    """测试正交列上 trace 下界取等号"""
    M = normalize_columns(np.eye(4))
    result = minimax_trace_floor(M, [0, 1], 1.0)
    assert result.trace_value == pytest.approx(2.0)
    assert result.closed_form == pytest.approx(2.0)
    assert result.holds


def test_minimax_trace_floor_pair():
    """测试两列 Gram 的 trace 闭式"""
    g = 0.3
    M = normalize_columns(np.array([[1.0, g], [0.0, math.sqrt(1.0 - g * g)]]))
    result = minimax_trace_floor(M, [0, 1], 2.0)
    assert result.trace_value == pytest.approx(4.0 * 2.0 / (1.0 - g * g))
    assert result.closed_form == pytest.approx(4.0 * 2.0 / (1.0 + g))
    assert result.holds


def test_minimax_trace_floor_identity_hadamard():
    """测试 [I | H] 上 100 个随机支撑均满足 trace 下界"""
    M = identity_hadamard_ensemble(64)
    rng = make_generator(5)
    for _ in range(100):
        support = rng.choice(M.n, size=4, replace=False)
        assert minimax_trace_floor(M, support, 1.0).holds


def test_minimax_trace_floor_empty_support():
    """测试空支撑报错"""
    with pytest.raises(EmptySupport):
        minimax_trace_floor(identity_hadamard_ensemble(4), [], 1.0)


def test_regularization_levels():
    """测试三个正则化水平"""
    levels = regularization_levels(1.0, 1024)
    assert levels["lambda_star"] == pytest.approx(9.94662, abs=1e-4)
    assert levels["eta_star"] == pytest.approx(5.22331, abs=1e-4)
    assert levels["lambda_event"] == pytest.approx(3.72331, abs=1e-4)

    doubled = regularization_levels(2.0, 1024)
    for key, value in levels.items():
        assert doubled[key] == pytest.approx(2.0 * value)

    assert regularization_levels(1.0, 128)["lambda_event"] == pytest.approx(3.11513, abs=1e-4)
    assert gaussian_width(128) == pytest.approx(WIDTH_128)


def test_qcbp_feasibility_level():
    """测试 QCBP 可行水平"""
    assert qcbp_feasibility_level(1.0, 64) == pytest.approx(math.sqrt(64 + 2 * math.sqrt(64 * math.log(64))))
    assert qcbp_feasibility_level(0.0, 64) == 0.0


def test_s_star():
    """测试 s* = m / log(en/m)"""
    assert s_star(32, 64) == pytest.approx(32.0 / math.log(2.0 * math.e))
    assert s_star(10, 10) == pytest.approx(10.0)
    with pytest.raises(InvalidParameter):
        s_star(65, 64)


def test_oracle_bound_sparse():
    """测试稀疏预言不等式"""
    factor = (2.0 + WIDTH_128) ** 2
    lasso = oracle_bound_sparse("lasso", 0.125, 1, 128, 1.0)
    assert lasso.value == pytest.approx(16.0 * factor / 0.0625 ** 2)
    assert lasso.value == pytest.approx(107170.3, rel=1e-5)

    ds = oracle_bound_sparse("ds", 0.125, 4, 128, 1.0)
    assert ds.value == pytest.approx(8.0 * factor / 0.125 ** 2)
    assert ds.value == pytest.approx(13396.3, rel=1e-4)

    assert oracle_bound_sparse("ds", 0.125, 4, 128, 0.0).value == 0.0


def test_oracle_bound_sparse_relaxed():
    """测试给出 sigma 时附带放宽形式"""
    report = oracle_bound_sparse("ds", 0.125, 4, 128, 1.0, sigma=0.5)
    assert report.inputs["relaxed_value"] == pytest.approx(report.value * 1.25)


def test_high_noise_bound_doubles_sparse():
    """测试高噪声界是稀疏预言界的两倍"""
    for model, s in (("lasso", 1), ("ds", 4)):
        sparse = oracle_bound_sparse(model, 0.125, s, 128, 1.0)
        high = high_noise_bound(model, 0.125, s, 128, 1.0)
        assert high.value == pytest.approx(2.0 * sparse.value)
    assert high_noise_bound("lasso", 0.125, 1, 128, 0.0).value == 0.0


def test_oracle_bound_general():
    """测试一般信号的预言不等式"""
    lasso = oracle_bound_general("lasso", 0.1, 2, 1024, 1.0, 0.0)
    assert lasso.value == pytest.approx(3.470e8, rel=1e-3)
    ds = oracle_bound_general("ds", 0.1, 2, 1024, 0.4, 0.6)
    assert ds.value == pytest.approx(5.754e6, rel=1e-3)
    assert oracle_bound_general("ds", 0.1, 2, 1024, 0.0, 0.0).value == 0.0


def test_oracle_bound_general_sparsity_limit():
    """测试给出 m 时 s* 超过 m/log(en/m) 则不适用"""
    report = oracle_bound_general("ds", 0.001, 20, 64, 1.0, 0.0, m=32)
    assert not report.applicable
    assert report.inputs["s_star_limit"] == pytest.approx(s_star(32, 64))
    assert report.probability is not None
    by_keyword = evaluate_bound("oracle_general_ds", {"mu": 0.001, "s_star": 20, "n": 64, "head_risk": 1.0,
                                                      "tail2sq": 0.0, "m": 32})
    assert by_keyword.inputs["s_star_limit"] == report.inputs["s_star_limit"]
    assert not by_keyword.applicable


def test_low_noise_bound():
    """测试低噪声界"""
    assert low_noise_bound("lasso", 0.1, 2, 1.0, 0.0).value == pytest.approx(1081.3, rel=1e-4)
    assert low_noise_bound("ds", 0.1, 2, 1.0, 0.0).value == pytest.approx(241.98, rel=1e-4)


def test_evaluate_bound_registry():
    """测试按标识求值与注册表覆盖全部标识"""
    report = evaluate_bound("stable_lasso", {"mu": 0.125, "s": 1, "level": 0.1, "tail1": 0.0})
    assert report.value == pytest.approx(3.0)
    assert set(Bounds.list()) == {str(item) for item in BoundId}

    with pytest.raises(InvalidParameter):
        evaluate_bound("stable_lasso", {"mu": 0.125, "sparsity": 1})
    with pytest.raises(ValueError):
        evaluate_bound("no_such_bound", {})


if __name__ == "__main__":
    test_stable_lasso_values()
    test_stable_lasso_not_applicable()
    test_stable_ds_and_qcbp_values()
    test_stable_bound_rejects_bad_inputs()
    test_gaussian_sparse_bound()
    test_event_probability_floor()
    test_event_probability_floor_union()
    test_minimax_expectation_lower()
    test_minimax_probability_lower()
    test_minimax_trace_floor_orthonormal()
    test_minimax_trace_floor_pair()
    test_minimax_trace_floor_identity_hadamard()
    test_minimax_trace_floor_empty_support()
    test_regularization_levels()
    test_qcbp_feasibility_level()
    test_s_star()
    test_oracle_bound_sparse()
    test_oracle_bound_sparse_relaxed()
    test_high_noise_bound_doubles_sparse()
    test_oracle_bound_general()
    test_oracle_bound_general_sparsity_limit()
    test_low_noise_bound()
    test_evaluate_bound_registry()
