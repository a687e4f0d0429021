# -*- coding: utf-8 -*-
'''
测试验证套件（缩小样本量）
'''

import asyncio
import logging
import os
import sys

import pytest

# 添加项目根目录到路径
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from pipelines.suites import Suites, suite_defaults, verify_bound_suite

# 配置日志
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def run_suite(name: str, **overrides):
    report = asyncio.run(verify_bound_suite(name, seed=2024, overrides=overrides))
    for assertion in report.assertions:
        logger.info(f"{name}.{assertion.name}: passed={assertion.passed} {assertion.detail}")
    return report


def test_registered_suites():
    """测试套件注册表与默认参数"""
    assert set(Suites.list()) == {"stable", "gaussian_sparse", "oracle_sparse", "oracle_general",
                                  "minimax_chain", "rnsp", "lq", "cone"}
    defaults = suite_defaults("rnsp")
    assert defaults["samples"] == 10000
    assert defaults["iota"] == pytest.approx(1.5)
    assert suite_defaults("no_such_suite") == {}


def test_unknown_suite():
    """测试未注册的套件"""
    with pytest.raises(KeyError):
        asyncio.run(verify_bound_suite("no_such_suite"))


def test_minimax_chain_suite():
    """测试迹下界套件"""
    report = run_suite("minimax_chain", supports=20)
    assert report.passed
    assert report.assertions[0].samples == 20


def test_rnsp_suite():
    """测试 RNSP 套件"""
    report = run_suite("rnsp", samples=300)
    assert report.passed
    assert report.assertions[0].failures == 0


def test_lq_suite():
    """测试商性质套件"""
    assert run_suite("lq", samples=5).passed


def test_cone_suite():
    """测试锥约束套件"""
    report = run_suite("cone", samples=20)
    assert report.passed
    assert [a.name for a in report.assertions] == ["cone_lasso", "cone_ds"]


def test_stable_suite():
    """测试稳定恢复套件"""
    report = run_suite("stable", trials=10, noiseless_trials=5)
    assert [a.name for a in report.assertions] == ["noiseless_bp_exact", "stable_lasso", "stable_ds", "stable_qcbp"]
    assert report.passed


def test_gaussian_sparse_suite():
    """测试高斯噪声稀疏界与事件频率"""
    report = run_suite("gaussian_sparse", trials=10, event_trials=200)
    assert report.passed


def test_oracle_sparse_suite():
    """测试稀疏预言不等式与预言量恒等式"""
    report = run_suite("oracle_sparse", trials=10, identity_samples=50)
    names = [a.name for a in report.assertions]
    assert names == ["oracle_sparse_ds", "oracle_sparse_lasso", "oracle_identity", "regime_partition"]
    assert report.passed


def test_oracle_general_suite():
    """测试高噪声界与高斯矩阵商性质"""
    report = run_suite("oracle_general", trials=10, lq_samples=5)
    assert report.passed


if __name__ == "__main__":
    test_registered_suites()
    test_minimax_chain_suite()
    test_rnsp_suite()
    test_lq_suite()
    test_cone_suite()
    test_stable_suite()
    test_gaussian_sparse_suite()
    test_oracle_sparse_suite()
    test_oracle_general_suite()
