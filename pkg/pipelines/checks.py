# -*- coding: utf-8 -*-
'''
单次试验上的检查项

每个检查项接收试验上下文，返回是否参与统计（前提条件是否成立）以及是否通过。
误差界在其前提事件下是确定性的，因此一次违例即视为失败；
event_frequency 是频率型检查，由汇总阶段与概率下界比较。
'''

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from sensing.bounds import (
    event_probability_floor,
    event_probability_floor_union,
    gaussian_sparse_bound,
    gaussian_width,
    high_noise_bound,
    oracle_bound_sparse,
    regularization_levels,
    stable_error_bound,
)
from sensing.geometry import best_s_term, cone_constraint_check_ds, cone_constraint_check_lasso
from sensing.measurement import MeasurementMatrix
from sensing.oracle import s_bar
from utils.protocol import ExperimentConfig, ProgramModel, SolveOutcome
from utils.registry import Registry

# 配置日志
logger = logging.getLogger(__name__)

Checks = Registry()

BOUND_RTOL = 1e-6
BOUND_ATOL = 1e-7
EXACT_RECOVERY_TOL = 1e-6
LEVEL_RTOL = 1e-9

# 频率型检查，不按单次违例判定
FREQUENCY_CHECKS = ("event_frequency",)


@dataclass
class TrialContext:
    """单次试验的全部中间量"""
    config: ExperimentConfig
    matrix: MeasurementMatrix
    mu: Optional[float]
    x: np.ndarray
    z: np.ndarray
    b: np.ndarray
    level: Optional[float]
    outcome: Optional[SolveOutcome]
    event_E: bool
    noise_correlation: float

    @property
    def solved(self) -> bool:
        return self.outcome is not None and self.outcome.converged

    @property
    def error_l2(self) -> Optional[float]:
        if self.outcome is None:
            return None
        return float(np.linalg.norm(self.outcome.estimate - self.x))

    @property
    def model(self) -> ProgramModel:
        return self.config.model

    @property
    def sigma(self) -> float:
        return self.config.sigma


@dataclass
class CheckResult:
    evaluated: bool
    passed: bool
    bound_value: Optional[float] = None

    @classmethod
    def skipped(cls, bound_value: Optional[float] = None) -> "CheckResult":
        return cls(evaluated=False, passed=False, bound_value=bound_value)


def _within(error: float, bound: float) -> bool:
    return error <= bound * (1.0 + BOUND_RTOL) + BOUND_ATOL


def _level_matches(level: Optional[float], target: float) -> bool:
    return level is not None and abs(level - target) <= LEVEL_RTOL * max(1.0, abs(target))


def _sparse(ctx: TrialContext) -> bool:
    return int(np.count_nonzero(ctx.x)) <= ctx.config.s


def _oracle_level(ctx: TrialContext) -> Optional[float]:
    """
    预言不等式要求的水平: DS 取 eta*，Lasso 取 lambda*
    """
    if ctx.sigma <= 0:
        return None
    levels = regularization_levels(ctx.sigma, ctx.matrix.n)
    if ctx.model == ProgramModel.DS:
        return levels["eta_star"]
    if ctx.model == ProgramModel.LASSO:
        return levels["lambda_star"]
    return None


def noise_condition(ctx: TrialContext) -> bool:
    """
    稳定恢复界的噪声前提: Lasso 要求 ||A^T z||_inf <= lambda/2，DS 要求 ||A^T z||_inf <= eta，
    QCBP 要求 ||z||_2 <= eta，BP 要求 z = 0
    """
    if ctx.model == ProgramModel.LASSO:
        return ctx.noise_correlation <= 0.5 * ctx.level
    if ctx.model == ProgramModel.DS:
        return ctx.noise_correlation <= ctx.level
    if ctx.model == ProgramModel.QCBP:
        return float(np.linalg.norm(ctx.z)) <= ctx.level
    return not np.any(ctx.z)


@Checks.register("stable_bound")
def check_stable_bound(ctx: TrialContext) -> CheckResult:
    """
    ||x_hat - x||_2 不超过稳定恢复界
    """
    if ctx.mu is None:
        return CheckResult.skipped()
    model = ProgramModel.QCBP if ctx.model == ProgramModel.BP else ctx.model
    level = 0.0 if ctx.model == ProgramModel.BP else ctx.level
    tail1 = float(np.sum(np.abs(best_s_term(ctx.x, ctx.config.s).tail)))
    report = stable_error_bound(model, ctx.mu, max(1, ctx.config.s), level, tail1)
    if not report.applicable or not ctx.solved or not noise_condition(ctx):
        return CheckResult.skipped(report.value)
    return CheckResult(evaluated=True, passed=_within(ctx.error_l2, report.value), bound_value=report.value)


@Checks.register("exact_recovery")
def check_exact_recovery(ctx: TrialContext) -> CheckResult:
    """
    无噪声时精确恢复
    """
    if ctx.sigma != 0 or not ctx.solved:
        return CheckResult.skipped()
    return CheckResult(evaluated=True, passed=ctx.error_l2 <= EXACT_RECOVERY_TOL)


@Checks.register("cone_lasso")
def check_cone_lasso(ctx: TrialContext) -> CheckResult:
    """
    Lasso 解的两条锥约束，前提 ||A^T z||_inf <= lambda/2
    """
    if ctx.model != ProgramModel.LASSO or not ctx.solved or not noise_condition(ctx):
        return CheckResult.skipped()
    cone = cone_constraint_check_lasso(ctx.matrix, ctx.x, ctx.outcome.estimate, ctx.config.s, ctx.level)
    return CheckResult(evaluated=True, passed=cone.ineq1 and cone.ineq2)


@Checks.register("cone_ds")
def check_cone_ds(ctx: TrialContext) -> CheckResult:
    """
    DS/QCBP/BP 解的锥约束，前提为真实信号可行
    """
    if ctx.model == ProgramModel.LASSO or not ctx.solved or not noise_condition(ctx):
        return CheckResult.skipped()
    cone = cone_constraint_check_ds(ctx.x, ctx.outcome.estimate, ctx.config.s)
    return CheckResult(evaluated=True, passed=cone.holds)


@Checks.register("gaussian_sparse")
def check_gaussian_sparse(ctx: TrialContext) -> CheckResult:
    """
    高斯噪声下 s-稀疏信号的平方误差界，DS 取 eta = sigma sqrt(2 log n)，Lasso 取 lambda = 2 sigma sqrt(2 log n)，
    在事件 E 上检查
    """
    if ctx.mu is None or ctx.sigma <= 0 or ctx.model not in (ProgramModel.DS, ProgramModel.LASSO):
        return CheckResult.skipped()
    target = ctx.sigma * gaussian_width(ctx.matrix.n)
    if ctx.model == ProgramModel.LASSO:
        target *= 2.0
    report = gaussian_sparse_bound(ctx.model, ctx.mu, max(1, ctx.config.s), ctx.sigma, ctx.matrix.n)
    if (not report.applicable or not ctx.solved or not ctx.event_E
            or not _sparse(ctx) or not _level_matches(ctx.level, target)):
        return CheckResult.skipped(report.value)
    return CheckResult(evaluated=True, passed=_within(ctx.error_l2 ** 2, report.value), bound_value=report.value)


def _effective_risk(ctx: TrialContext) -> float:
    return float(np.sum(np.minimum(ctx.sigma ** 2, ctx.x ** 2)))


@Checks.register("oracle_sparse")
def check_oracle_sparse(ctx: TrialContext) -> CheckResult:
    """
    s-稀疏信号的预言不等式，水平取 eta* / lambda*，在事件 E 上检查
    """
    target = _oracle_level(ctx)
    if ctx.mu is None or target is None:
        return CheckResult.skipped()
    report = oracle_bound_sparse(ctx.model, ctx.mu, max(1, ctx.config.s), ctx.matrix.n, _effective_risk(ctx))
    if (not report.applicable or not ctx.solved or not ctx.event_E
            or not _sparse(ctx) or not _level_matches(ctx.level, target)):
        return CheckResult.skipped(report.value)
    return CheckResult(evaluated=True, passed=_within(ctx.error_l2 ** 2, report.value), bound_value=report.value)


@Checks.register("high_noise")
def check_high_noise(ctx: TrialContext) -> CheckResult:
    """
    一般信号以 s_bar 代替 s 的平方误差界，水平取 eta* / lambda*，在事件 E 上检查
    """
    target = _oracle_level(ctx)
    if ctx.mu is None or target is None:
        return CheckResult.skipped()
    sparsity = s_bar(ctx.x, ctx.sigma)
    if sparsity < 1:
        return CheckResult.skipped()
    report = high_noise_bound(ctx.model, ctx.mu, sparsity, ctx.matrix.n, _effective_risk(ctx))
    if not report.applicable or not ctx.solved or not ctx.event_E or not _level_matches(ctx.level, target):
        return CheckResult.skipped(report.value)
    return CheckResult(evaluated=True, passed=_within(ctx.error_l2 ** 2, report.value), bound_value=report.value)


@Checks.register("event_frequency")
def check_event_frequency(ctx: TrialContext) -> CheckResult:
    """
    事件 E = {||A^T z||_inf <= sigma sqrt(2 log n)} 是否发生
    """
    return CheckResult(evaluated=True, passed=ctx.event_E)


def frequency_floor(n: int, trials: int) -> Dict[str, float]:
    """
    事件 E 的概率下界

    返回:
        floor: 陈述的下界 1 - 1/(2 sqrt(pi log n))
        union_floor: 双侧并集界 1 - 1/sqrt(pi log n)
        floor_3sd: union_floor 减去三倍二项标准差，频率检查以此判定
    """
    union = event_probability_floor_union(n)
    spread = 3.0 * math.sqrt(union * (1.0 - union) / trials)
    return {"floor": event_probability_floor(n), "union_floor": union, "floor_3sd": union - spread}


def run_checks(names: List[str], ctx: TrialContext) -> Dict[str, CheckResult]:
    results = {}
    for name in names:
        check: Callable[[TrialContext], CheckResult] = Checks.require(name)
        results[name] = check(ctx)
    return results
