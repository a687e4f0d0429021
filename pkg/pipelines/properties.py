# -*- coding: utf-8 -*-
'''
确定性性质的抽样验证: rnsp、lq、cone-lasso、cone-ds、polytope、gram

每个性质在 samples 个样本上检查，返回失败个数与最差余量（rhs - lhs，负值即违例）。
'''

import logging
import math
from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np

from engine.solve import solve_dantzig, solve_lasso
from sensing.bounds import gaussian_width
from sensing.geometry import (
    cone_constraint_check_ds,
    cone_constraint_check_lasso,
    lq_alpha,
    lq_ratio,
    polytope_decompose,
    rnsp_check,
    rnsp_constants,
)
from sensing.measurement import MeasurementMatrix, coherence, sparse_gram_bounds_check
from sensing.signals import rademacher_support
from utils.exceptions import InvalidParameter, NotApplicable, NotConverged
from utils.protocol import PolytopeDecomposition, PropertyReport, SolverConfig
from utils.registry import Registry
from utils.rng import make_generator

# 配置日志
logger = logging.getLogger(__name__)

Properties = Registry()

WEIGHT_TOL = 1e-12
ATOM_L1_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-10
RNSP_FAMILIES = ("gaussian", "sparse_plus_gaussian", "null_space")


class _Tally:
    """失败计数与最差余量"""

    def __init__(self):
        self.samples = 0
        self.failures = 0
        self.worst_slack = math.inf

    def add(self, holds: bool, slack: float) -> None:
        self.samples += 1
        self.failures += 0 if holds else 1
        self.worst_slack = min(self.worst_slack, slack)

    def report(self, name: str) -> PropertyReport:
        worst = self.worst_slack if self.samples else 0.0
        return PropertyReport(property=name, samples=self.samples, failures=self.failures, worst_slack=worst)


def _require_matrix(M: Optional[MeasurementMatrix], name: str) -> MeasurementMatrix:
    if M is None:
        raise InvalidParameter(f"性质 {name} 需要测量矩阵")
    return M


def _solver_config(params: Dict[str, Any]) -> Optional[SolverConfig]:
    overrides = params.get("solver")
    return SolverConfig(**overrides) if overrides else None


def rnsp_sample(M: MeasurementMatrix, s: int, family: str, rng: np.random.Generator,
                null_projector: Optional[np.ndarray] = None) -> np.ndarray:
    """
    RNSP 抽样: 标准高斯、s-稀疏加小高斯扰动、投影到零空间的高斯
    """
    n = M.n
    if family == "gaussian":
        return rng.standard_normal(n)
    if family == "sparse_plus_gaussian":
        x = 0.1 * rng.standard_normal(n)
        support = rng.choice(n, size=s, replace=False)
        x[support] += 10.0 * rng.standard_normal(s)
        return x
    if family == "null_space":
        if null_projector is None:
            null_projector = np.eye(n) - np.linalg.pinv(M.entries) @ M.entries
        return null_projector @ rng.standard_normal(n)
    raise InvalidParameter(f"不支持的抽样族: {family}，可选: {list(RNSP_FAMILIES)}")


@Properties.register("rnsp")
def verify_rnsp(M: Optional[MeasurementMatrix], params: Dict[str, Any], samples: int,
                rng: np.random.Generator) -> PropertyReport:
    """
    l2 型与 Dantzig 型两个 RNSP 不等式，三个抽样族轮流使用
    """
    M = _require_matrix(M, "rnsp")
    s = int(params.get("s", 1))
    constants = rnsp_constants(coherence(M), s, float(params.get("iota", 1.5)))
    if not constants.applicable:
        raise NotApplicable(f"μ={constants.mu:.6g} 不满足 RNSP 的相干性条件 (s={s}, ι={constants.iota})")
    projector = np.eye(M.n) - np.linalg.pinv(M.entries) @ M.entries
    tally = _Tally()
    for i in range(samples):
        x = rnsp_sample(M, s, RNSP_FAMILIES[i % len(RNSP_FAMILIES)], rng, projector)
        l2 = rnsp_check(M, x, s, constants, "l2")
        dantzig = rnsp_check(M, x, s, constants, "dantzig")
        tally.add(l2.holds and dantzig.holds, min(l2.rhs - l2.lhs, dantzig.rhs - dantzig.lhs))
    return tally.report("rnsp")


@Properties.register("lq")
def verify_lq(M: Optional[MeasurementMatrix], params: Dict[str, Any], samples: int,
              rng: np.random.Generator) -> PropertyReport:
    """
    ||x_tilde||_1 / ||Ax||_2 <= 1/alpha，alpha 缺省取高斯矩阵的常数
    """
    M = _require_matrix(M, "lq")
    alpha = params.get("alpha")
    if alpha is None:
        alpha = lq_alpha(M.m, M.n, bool(params.get("scaled", True)))
    limit = 1.0 / float(alpha)
    cfg = _solver_config(params)
    tally = _Tally()
    for _ in range(samples):
        try:
            ratio = lq_ratio(M, rng.standard_normal(M.n), cfg)
        except NotConverged as e:
            logger.warning(f"[verify_lq] {e}")
            tally.add(False, -math.inf)
            continue
        tally.add(ratio <= limit, limit - ratio)
    return tally.report("lq")


def _noisy_sparse_draw(M: MeasurementMatrix, s: int, sigma: float, rng: np.random.Generator,
                       amplitude: float) -> Tuple[np.ndarray, np.ndarray]:
    x = rademacher_support(M.n, s, rng, amplitude=amplitude)
    z = sigma * rng.standard_normal(M.m)
    return x, z


@Properties.register("cone-lasso")
def verify_cone_lasso(M: Optional[MeasurementMatrix], params: Dict[str, Any], samples: int,
                      rng: np.random.Generator) -> PropertyReport:
    """
    Lasso 锥约束，只统计满足 ||A^T z||_inf <= lambda/2 的样本
    """
    M = _require_matrix(M, "cone-lasso")
    s, sigma = int(params.get("s", 1)), float(params.get("sigma", 0.05))
    lam = float(params.get("lam", 2.0 * sigma * gaussian_width(M.n)))
    cfg = _solver_config(params)
    tally = _Tally()
    for _ in range(samples):
        x, z = _noisy_sparse_draw(M, s, sigma, rng, float(params.get("amplitude", 1.0)))
        if float(np.max(np.abs(M.entries.T @ z))) > 0.5 * lam:
            continue
        outcome = solve_lasso(M, M.entries @ x + z, lam, cfg)
        if not outcome.converged:
            tally.add(False, -math.inf)
            continue
        cone = cone_constraint_check_lasso(M, x, outcome.estimate, s, lam)
        tally.add(cone.ineq1 and cone.ineq2, min(cone.slack1, cone.slack2))
    return tally.report("cone-lasso")


@Properties.register("cone-ds")
def verify_cone_ds(M: Optional[MeasurementMatrix], params: Dict[str, Any], samples: int,
                   rng: np.random.Generator) -> PropertyReport:
    """
    Dantzig 锥约束，只统计真实信号可行的样本
    """
    M = _require_matrix(M, "cone-ds")
    s, sigma = int(params.get("s", 1)), float(params.get("sigma", 0.05))
    eta = float(params.get("eta", sigma * gaussian_width(M.n)))
    cfg = _solver_config(params)
    tally = _Tally()
    for _ in range(samples):
        x, z = _noisy_sparse_draw(M, s, sigma, rng, float(params.get("amplitude", 1.0)))
        if float(np.max(np.abs(M.entries.T @ z))) > eta:
            continue
        outcome = solve_dantzig(M, M.entries @ x + z, eta, cfg)
        if not outcome.converged:
            tally.add(False, -math.inf)
            continue
        cone = cone_constraint_check_ds(x, outcome.estimate, s)
        tally.add(cone.holds, cone.slack)
    return tally.report("cone-ds")


def polytope_sample(n: int, kappa: float, s: int, rng: np.random.Generator) -> np.ndarray:
    """
    T(kappa, s) 中的随机点: 高斯方向缩放到边界后再乘以 (0, 1] 中的随机因子，三分之一的样本取在边界上
    """
    direction = rng.standard_normal(n)
    scale = min(kappa / float(np.max(np.abs(direction))), s * kappa / float(np.sum(np.abs(direction))))
    shrink = 1.0 if rng.random() < 1.0 / 3.0 else rng.uniform(0.2, 1.0)
    return direction * scale * shrink


def decomposition_margin(x: np.ndarray, decomposition: PolytopeDecomposition, kappa: float, s: int) -> float:
    """
    分解各项不变量的最小余量，非负即全部满足
    """
    weights = np.asarray(decomposition.weights)
    margins = [float(np.min(weights)) + WEIGHT_TOL, WEIGHT_TOL - abs(float(np.sum(weights)) - 1.0)]
    l1 = float(np.sum(np.abs(x)))
    outside = np.abs(x) == 0
    reconstruction = np.zeros_like(x)
    for weight, atom in zip(decomposition.weights, decomposition.atoms):
        margins.append(float(s - np.count_nonzero(atom)))
        margins.append(-float(np.max(np.abs(atom[outside]), initial=0.0)))
        margins.append(ATOM_L1_TOL - abs(float(np.sum(np.abs(atom))) - l1))
        margins.append(kappa * (1.0 + 1e-12) - float(np.max(np.abs(atom), initial=0.0)))
        reconstruction += weight * atom
    margins.append(RECONSTRUCTION_TOL - float(np.max(np.abs(reconstruction - x), initial=0.0)))
    return min(margins)


@Properties.register("polytope")
def verify_polytope(M: Optional[MeasurementMatrix], params: Dict[str, Any], samples: int,
                    rng: np.random.Generator) -> PropertyReport:
    """
    多面体分解的不变量；测量矩阵只用于确定维数，缺省 n 取 params["n"]
    """
    kappa, s = float(params.get("kappa", 1.0)), int(params.get("s", 3))
    n = M.n if M is not None else int(params.get("n", 12))
    tally = _Tally()
    for _ in range(samples):
        x = polytope_sample(n, kappa, s, rng)
        margin = decomposition_margin(x, polytope_decompose(x, kappa, s), kappa, s)
        tally.add(margin >= 0.0, margin)
    return tally.report("polytope")


@Properties.register("gram")
def verify_gram(M: Optional[MeasurementMatrix], params: Dict[str, Any], samples: int,
                rng: np.random.Generator) -> PropertyReport:
    """
    随机 s 元支撑上 Gram 子矩阵的谱界
    """
    M = _require_matrix(M, "gram")
    s = int(params.get("s", 2))
    tally = _Tally()
    for _ in range(samples):
        support = rng.choice(M.n, size=s, replace=False)
        check = sparse_gram_bounds_check(M, support)
        tally.add(check.holds, min(check.min_eig - check.lower, check.upper - check.max_eig))
    return tally.report("gram")


def verify_property(name: str, M: Optional[MeasurementMatrix], params: Optional[Dict[str, Any]] = None,
                    samples: int = 100, seed: int = 0) -> PropertyReport:
    """
    按名称验证性质

    参数:
        name: rnsp / lq / cone-lasso / cone-ds / polytope / gram
        M: 测量矩阵
        params: 性质参数，例如 {"s": 3, "iota": 1.5}
        samples: 样本数
        seed: 随机种子

    返回:
        PropertyReport
    """
    verify: Callable[..., PropertyReport] = Properties.require(name)
    report = verify(M, dict(params or {}), int(samples), make_generator(seed))
    logger.info(f"[verify_property] {name}: samples={report.samples}, failures={report.failures}, "
                f"worst_slack={report.worst_slack:.6g}")
    return report
