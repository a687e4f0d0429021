# -*- coding: utf-8 -*-
'''
测试四个凸规划求解器: 与独立参考解比较目标值，检查平凡情形、不可行与收敛报告
'''

import asyncio
import logging
import os
import sys

import numpy as np
import pytest
from scipy.optimize import linprog, minimize

# 添加项目根目录到路径
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from engine import SolverPool, solve_bp, solve_dantzig, solve_lasso, solve_qcbp
from engine.engineBase import lipschitz_constant, soft_threshold
from engine.solver.lassoSolver import lasso_objective
from sensing.measurement import gaussian_ensemble, identity_hadamard_ensemble
from utils.exceptions import DimensionMismatch, InfeasibleError, InvalidParameter, NotConverged
from utils.protocol import ProgramModel, SolverConfig, StepRule
from utils.rng import make_generator

# 配置日志
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def coordinate_descent_lasso(A: np.ndarray, b: np.ndarray, lam: float, sweeps: int = 20000) -> np.ndarray:
    """单位列范数下的循环坐标下降，作为 Lasso 的参考解"""
    x = np.zeros(A.shape[1])
    residual = b.copy()
    for _ in range(sweeps):
        largest = 0.0
        for j in range(A.shape[1]):
            old = x[j]
            rho = old + float(A[:, j] @ residual)
            new = np.sign(rho) * max(abs(rho) - lam, 0.0)
            if new != old:
                residual -= A[:, j] * (new - old)
                x[j] = new
                largest = max(largest, abs(new - old))
        if largest < 1e-15:
            break
    return x


def relative_gap(value: float, reference: float) -> float:
    return abs(value - reference) / max(1.0, abs(reference))


def sparse_signal(n: int, s: int, rng: np.random.Generator) -> np.ndarray:
    x = np.zeros(n)
    support = rng.choice(n, size=s, replace=False)
    x[support] = rng.choice([-1.0, 1.0], size=s)
    return x


def test_soft_threshold():
    """测试软阈值"""
    result = soft_threshold(np.array([3.0, -0.5, -2.0, 0.0]), 1.0)
    assert np.allclose(result, [2.0, 0.0, -1.0, 0.0])


def test_lipschitz_constant():
    """测试幂迭代估计的 ||A||_2^2 不小于真实值"""
    A = gaussian_ensemble(20, 40, seed=3).entries
    exact = float(np.linalg.norm(A, 2) ** 2)
    estimate = lipschitz_constant(A, iterations=100)
    assert estimate >= exact * (1 - 1e-9)
    assert estimate <= exact * 1.01


def test_lasso_matches_coordinate_descent():
    """测试 Lasso 目标值与坐标下降参考解一致"""
    for seed in range(20):
        M = gaussian_ensemble(8, 16, seed=seed)
        rng = make_generator(1000, seed)
        b = rng.standard_normal(8)
        lam = 0.1 * float(np.max(np.abs(M.entries.T @ b)))

        outcome = solve_lasso(M, b, lam)
        reference = coordinate_descent_lasso(M.entries, b, lam)
        expected = lasso_objective(M.entries, b, lam, reference)

        assert outcome.converged
        assert outcome.model == ProgramModel.LASSO
        assert relative_gap(outcome.objective, expected) <= 1e-6


def test_lasso_backtracking_step_rule():
    """测试回溯步长与固定步长得到相同目标值"""
    M = gaussian_ensemble(10, 20, seed=7)
    b = make_generator(7).standard_normal(10)
    lam = 0.2 * float(np.max(np.abs(M.entries.T @ b)))

    fixed = solve_lasso(M, b, lam)
    backtracking = solve_lasso(M, b, lam, SolverConfig(step_rule=StepRule.BACKTRACKING))
    assert fixed.converged and backtracking.converged
    assert relative_gap(fixed.objective, backtracking.objective) <= 1e-6


def test_lasso_trace_monotone():
    """测试记录的目标值轨迹单调不增"""
    M = gaussian_ensemble(16, 32, seed=11)
    b = make_generator(11).standard_normal(16)
    lam = 0.05 * float(np.max(np.abs(M.entries.T @ b)))

    outcome = solve_lasso(M, b, lam, SolverConfig(record_trace=True))
    trace = outcome.objective_trace
    assert trace is not None and len(trace) >= 2
    assert all(later <= earlier * (1 + 1e-12) + 1e-15 for earlier, later in zip(trace, trace[1:]))


def test_lasso_zero_solution():
    """测试 lambda >= ||A^T b||_inf 时返回零解"""
    M = gaussian_ensemble(8, 16, seed=1)
    b = make_generator(1).standard_normal(8)
    lam = float(np.max(np.abs(M.entries.T @ b)))

    outcome = solve_lasso(M, b, lam)
    assert outcome.converged
    assert outcome.iterations == 0
    assert np.all(outcome.estimate == 0.0)


def test_lasso_invalid_lambda():
    """测试 lambda 非正时报错"""
    M = gaussian_ensemble(8, 16, seed=1)
    b = np.ones(8)
    with pytest.raises(InvalidParameter):
        solve_lasso(M, b, 0.0)
    with pytest.raises(InvalidParameter):
        solve_lasso(M, b, -1.0)


def test_dimension_mismatch():
    """测试 b 长度与 m 不一致时报错"""
    M = gaussian_ensemble(8, 16, seed=1)
    with pytest.raises(DimensionMismatch):
        solve_bp(M, np.ones(7))


def test_bp_exact_recovery_identity_hadamard():
    """测试 [I | H] (m=64) 上 4-稀疏 ±1 信号的无噪声精确恢复"""
    M = identity_hadamard_ensemble(64)
    rng = make_generator(2024)
    for _ in range(100):
        x = sparse_signal(M.n, 4, rng)
        outcome = solve_bp(M, M.entries @ x)
        assert outcome.converged
        assert np.linalg.norm(outcome.estimate - x) <= 1e-6


def test_bp_zero_measurement():
    """测试 b = 0 时 BP 返回零解"""
    M = gaussian_ensemble(8, 16, seed=2)
    outcome = solve_bp(M, np.zeros(8))
    assert outcome.converged
    assert np.all(outcome.estimate == 0.0)


def test_bp_infeasible():
    """测试 b 不在 A 的值域内时抛出 InfeasibleError"""
    A = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0]]) / np.sqrt(2.0)
    with pytest.raises(InfeasibleError):
        solve_bp(A, np.array([1.0, 2.0]))


def test_qcbp_infeasible():
    """测试值域外距离超过 eta 时 QCBP 不可行"""
    A = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0]]) / np.sqrt(2.0)
    with pytest.raises(InfeasibleError):
        solve_qcbp(A, np.array([1.0, 3.0]), 0.1)


def test_dantzig_matches_linear_program():
    """测试 Dantzig 选择器目标值与线性规划参考解一致"""
    for seed in range(10):
        M = gaussian_ensemble(3, 5, seed=100 + seed)
        A = M.entries
        b = make_generator(100 + seed).standard_normal(3)
        eta = 0.1 * float(np.max(np.abs(A.T @ b)))

        # x = u - v, u, v >= 0
        gram = A.T @ A
        center = A.T @ b
        G = np.hstack([gram, -gram])
        reference = linprog(
            c=np.ones(10),
            A_ub=np.vstack([G, -G]),
            b_ub=np.concatenate([center + eta, eta - center]),
            bounds=[(0, None)] * 10,
            method="highs",
        )
        assert reference.status == 0

        outcome = solve_dantzig(M, b, eta)
        assert outcome.converged
        assert outcome.model == ProgramModel.DS
        assert np.max(np.abs(center - gram @ outcome.estimate)) <= eta + 1e-6
        assert relative_gap(outcome.objective, reference.fun) <= 1e-6


def test_dantzig_zero_solution():
    """测试 eta >= ||A^T b||_inf 时返回零解"""
    M = gaussian_ensemble(8, 16, seed=4)
    b = make_generator(4).standard_normal(8)
    outcome = solve_dantzig(M, b, float(np.max(np.abs(M.entries.T @ b))) + 1e-9)
    assert outcome.converged
    assert np.all(outcome.estimate == 0.0)


def test_qcbp_against_slsqp():
    """测试 QCBP 的目标值不劣于 SLSQP 得到的可行点"""
    for seed in range(5):
        M = gaussian_ensemble(8, 16, seed=200 + seed)
        A = M.entries
        b = make_generator(200 + seed).standard_normal(8)
        eta = 0.3 * float(np.linalg.norm(b))

        def split_objective(z):
            return float(np.sum(z))

        def ball_constraint(z):
            r = A @ (z[:16] - z[16:]) - b
            return eta ** 2 - float(r @ r)

        start = np.linalg.lstsq(A, b, rcond=None)[0]
        reference = minimize(
            split_objective,
            np.concatenate([np.maximum(start, 0.0), np.maximum(-start, 0.0)]),
            method="SLSQP",
            jac=lambda z: np.ones_like(z),
            bounds=[(0, None)] * 32,
            constraints=[{"type": "ineq", "fun": ball_constraint}],
            options={"ftol": 1e-12, "maxiter": 1000},
        )
        x_ref = reference.x[:16] - reference.x[16:]

        outcome = solve_qcbp(M, b, eta)
        assert outcome.converged
        assert np.linalg.norm(A @ outcome.estimate - b) <= eta * (1 + 1e-6) + 1e-8
        if np.linalg.norm(A @ x_ref - b) <= eta * (1 + 1e-6):
            assert outcome.objective <= float(np.sum(np.abs(x_ref))) * (1 + 1e-5) + 1e-8


def test_qcbp_zero_solution():
    """测试 eta >= ||b|| 时返回零解"""
    M = gaussian_ensemble(8, 16, seed=5)
    b = make_generator(5).standard_normal(8)
    outcome = solve_qcbp(M, b, float(np.linalg.norm(b)))
    assert outcome.converged
    assert np.all(outcome.estimate == 0.0)


def test_qcbp_zero_level_equals_bp():
    """测试 eta = 0 的 QCBP 与 BP 一致"""
    M = gaussian_ensemble(16, 32, seed=6)
    x = sparse_signal(32, 2, make_generator(6))
    b = M.entries @ x
    qcbp = solve_qcbp(M, b, 0.0)
    bp = solve_bp(M, b)
    assert qcbp.converged and bp.converged
    assert relative_gap(qcbp.objective, bp.objective) <= 1e-6


def test_converged_residuals_within_tolerance():
    """测试 converged 为真时两类残差均不超过容差"""
    M = gaussian_ensemble(12, 24, seed=9)
    b = make_generator(9).standard_normal(12)
    cfg = SolverConfig()
    outcomes = [
        solve_lasso(M, b, 0.1, cfg),
        solve_dantzig(M, b, 0.1, cfg),
        solve_qcbp(M, b, 0.5, cfg),
        solve_bp(M, b, cfg),
    ]
    for outcome in outcomes:
        if outcome.converged:
            assert outcome.primal_residual <= cfg.tolerance * max(1.0, float(np.linalg.norm(b)))
            assert outcome.optimality_residual <= cfg.tolerance


def test_raise_if_failed():
    """测试迭代上限过小时 raise_if_failed 抛出 NotConverged，收敛时返回自身"""
    M = gaussian_ensemble(20, 60, seed=4)
    b = M.entries @ make_generator(4).standard_normal(60)
    truncated = solve_bp(M, b, SolverConfig(max_iterations=1))
    assert not truncated.converged
    with pytest.raises(NotConverged) as info:
        truncated.raise_if_failed()
    assert info.value.outcome is truncated

    outcome = solve_bp(M, b)
    assert outcome.converged
    assert outcome.raise_if_failed() is outcome


def test_async_run():
    """测试异步接口与同步接口结果一致"""
    M = gaussian_ensemble(8, 16, seed=12)
    b = make_generator(12).standard_normal(8)
    pool = SolverPool()
    engine = pool.getEngine(ProgramModel.LASSO)
    outcome = asyncio.run(engine.run(M, b, 0.1))
    assert relative_gap(outcome.objective, engine.solve(M, b, 0.1).objective) <= 1e-12


def test_pool_reuses_engines():
    """测试求解器池对同一规划类型返回同一实例"""
    pool = SolverPool()
    first = pool.getEngine(ProgramModel.DS)
    assert pool.getEngine("ds") is first
    assert ProgramModel.DS in pool.listEngines()


if __name__ == "__main__":
    test_soft_threshold()
    test_lipschitz_constant()
    test_lasso_matches_coordinate_descent()
    test_lasso_backtracking_step_rule()
    test_lasso_trace_monotone()
    test_lasso_zero_solution()
    test_lasso_invalid_lambda()
    test_dimension_mismatch()
    test_bp_exact_recovery_identity_hadamard()
    test_bp_zero_measurement()
    test_bp_infeasible()
    test_qcbp_infeasible()
    test_dantzig_matches_linear_program()
    test_dantzig_zero_solution()
    test_qcbp_against_slsqp()
    test_qcbp_zero_solution()
    test_qcbp_zero_level_equals_bp()
    test_converged_residuals_within_tolerance()
    test_raise_if_failed()
    test_async_run()
    test_pool_reuses_engines()
