# -*- coding: utf-8 -*-
'''
验证套件: 把实验与性质检查打包成带默认参数的断言集合

默认参数位于 configs/suites/default.yaml，调用时可以按键覆盖（测试中用于缩小样本量）。
'''

import copy
import logging
from typing import Any, Awaitable, Callable, Dict, List, Optional

import numpy as np
from yacs.config import CfgNode as CN

from sensing.bounds import minimax_expectation_lower, minimax_trace_floor
from sensing.geometry import best_s_term
from sensing.measurement import coherence, gaussian_ensemble, identity_hadamard_ensemble
from sensing.oracle import (
    above_noise_support,
    effective_dimension,
    noise_regime_classify,
    oracle_risk,
    restrict,
)
from utils.config import CONFIG_DIR, load_config
from utils.configParser import ConfigParser
from utils.protocol import AssertionResult, NoiseRegime, ScaleMode, SuiteReport
from utils.registry import Registry
from utils.rng import derived_seed, make_generator
from .experiment import parse_experiment_config, run_experiment
from .checks import FREQUENCY_CHECKS
from .properties import verify_property

# 配置日志
logger = logging.getLogger(__name__)

Suites = Registry()

SUITE_CONFIG_FILE = CONFIG_DIR / "suites" / "default.yaml"
ORACLE_IDENTITY_RTOL = 1e-12


def suite_defaults(name: str) -> Dict[str, Any]:
    """
    读取套件的默认参数
    """
    defaults = ConfigParser.load_yaml(str(SUITE_CONFIG_FILE), freeze=False)
    if name not in defaults:
        return {}
    return ConfigParser.cn_to_dict(defaults[name])


class SuiteContext:
    """
    套件运行上下文: 参数、种子与全局配置；每个断言使用独立的派生种子
    """
    def __init__(self, name: str, params: Dict[str, Any], seed: int, cfg: CN):
        self.name = name
        self.params = params
        self.seed = seed
        self.cfg = cfg
        self._counter = 0

    def next_seed(self) -> int:
        self._counter += 1
        return derived_seed(self.seed, self._counter)

    async def experiment(self, name: str, **fields) -> AssertionResult:
        """
        运行一次实验并转为断言: 实验通过且每个界检查至少统计到一次试验
        """
        fields.setdefault("master_seed", self.next_seed())
        config = parse_experiment_config(fields)
        report = await run_experiment(config, cfg=self.cfg)
        bound_checks = [k for k in config.checks if k not in FREQUENCY_CHECKS]
        evaluated = sum(report.checks[k].evaluated for k in bound_checks)
        violations = sum(report.checks[k].violations for k in bound_checks)
        vacuous = [k for k in bound_checks if report.checks[k].evaluated == 0]
        details = [f"{k}: {report.checks[k].passed}/{report.checks[k].evaluated}" for k in config.checks]
        details.append(f"solver_failure_rate={report.solver_failure_rate:.4f}")
        if report.event_probability_floor is not None:
            details.append(f"event_frequency={report.event_frequency:.5f}")
        if vacuous:
            details.append(f"未统计到试验: {vacuous}")
        return AssertionResult(
            name=name,
            passed=report.passed and not vacuous,
            samples=evaluated or report.trials,
            failures=violations + report.solver_failures,
            detail=", ".join(details),
        )

    def property(self, name: str, prop: str, matrix, params: Dict[str, Any], samples: int) -> AssertionResult:
        """
        运行一次性质检查并转为断言
        """
        report = verify_property(prop, matrix, params, samples, self.next_seed())
        return AssertionResult(
            name=name,
            passed=report.failures == 0 and report.samples > 0,
            samples=report.samples,
            failures=report.failures,
            worst_slack=report.worst_slack,
            detail=f"{prop}: {report.samples - report.failures}/{report.samples}",
        )


def _hadamard_fields(params: Dict[str, Any]) -> Dict[str, Any]:
    m = int(params["m"])
    return {"ensemble": "identity_hadamard", "m": m, "n": 2 * m}


@Suites.register("stable")
async def stable_suite(ctx: SuiteContext) -> List[AssertionResult]:
    p = ctx.params
    base = _hadamard_fields(p)
    return [
        await ctx.experiment("noiseless_bp_exact", **base, s=p["noiseless_s"], sigma=0.0, model="bp",
                             signal_model="rademacher_support", trials=p["noiseless_trials"],
                             checks=["exact_recovery", "stable_bound"]),
        await ctx.experiment("stable_lasso", **base, s=p["lasso_s"], sigma=p["sigma"], model="lasso",
                             signal_model="rademacher_support", level_rule=p["lasso_level"],
                             trials=p["trials"], checks=["stable_bound"]),
        await ctx.experiment("stable_ds", **base, s=p["ds_s"], sigma=p["sigma"], model="ds",
                             signal_model="rademacher_support", level_rule=p["ds_level"],
                             trials=p["trials"], checks=["stable_bound"]),
        await ctx.experiment("stable_qcbp", **base, s=p["qcbp_s"], sigma=p["sigma"], model="qcbp",
                             signal_model="rademacher_support", level_rule=p["qcbp_level"],
                             trials=p["trials"], checks=["stable_bound"]),
    ]


@Suites.register("gaussian_sparse")
async def gaussian_sparse_suite(ctx: SuiteContext) -> List[AssertionResult]:
    p = ctx.params
    base = _hadamard_fields(p)
    return [
        await ctx.experiment("event_frequency", **base, s=p["ds_s"], sigma=p["sigma"], model="ds",
                             signal_model="rademacher_support", level_rule="lambda_event_times(1)",
                             trials=p["event_trials"], checks=["event_frequency"]),
        await ctx.experiment("gaussian_sparse_ds", **base, s=p["ds_s"], sigma=p["sigma"], model="ds",
                             signal_model="rademacher_support", level_rule="lambda_event_times(1)",
                             trials=p["trials"], checks=["gaussian_sparse"]),
        await ctx.experiment("gaussian_sparse_lasso", **base, s=p["lasso_s"], sigma=p["sigma"], model="lasso",
                             signal_model="rademacher_support", level_rule="lambda_event_times(2)",
                             trials=p["trials"], checks=["gaussian_sparse"]),
    ]


def _oracle_identity(ctx: SuiteContext) -> List[AssertionResult]:
    """
    K(x_{S0}, x) = sigma^2 tau，以及三种噪声水平的划分与定义一致
    """
    p = ctx.params
    n, samples = int(p["identity_n"]), int(p["identity_samples"])
    rng = make_generator(ctx.next_seed())
    identity_failures, partition_failures = 0, 0
    worst = np.inf
    for _ in range(samples):
        x = rng.standard_normal(n) * rng.uniform(0.1, 3.0)
        x[rng.random(n) < 0.3] = 0.0
        sigma = float(rng.uniform(0.1, 2.0))
        k_value = oracle_risk(restrict(x, above_noise_support(x, sigma)), x, sigma)
        target = sigma ** 2 * effective_dimension(x, sigma)
        gap = abs(k_value - target) / max(abs(target), np.finfo(float).tiny)
        worst = min(worst, ORACLE_IDENTITY_RTOL - gap)
        identity_failures += gap > ORACLE_IDENTITY_RTOL

        s_star = int(rng.integers(1, n + 1))
        count_star = int(np.count_nonzero(best_s_term(x, s_star).head))
        count_s0 = int(above_noise_support(x, sigma).size)
        high = k_value <= sigma ** 2 * count_star
        expected = (NoiseRegime.HIGH if high else
                    NoiseRegime.LOW if count_s0 >= count_star else NoiseRegime.MEDIUM)
        partition_failures += noise_regime_classify(x, sigma, s_star) != expected
    return [
        AssertionResult(name="oracle_identity", passed=identity_failures == 0, samples=samples,
                        failures=identity_failures, worst_slack=float(worst)),
        AssertionResult(name="regime_partition", passed=partition_failures == 0, samples=samples,
                        failures=partition_failures),
    ]


@Suites.register("oracle_sparse")
async def oracle_sparse_suite(ctx: SuiteContext) -> List[AssertionResult]:
    p = ctx.params
    base = _hadamard_fields(p)
    results = [
        await ctx.experiment("oracle_sparse_ds", **base, s=p["ds_s"], sigma=p["sigma"], model="ds",
                             signal_model="rademacher_support", level_rule="eta_star",
                             trials=p["trials"], checks=["oracle_sparse"]),
        await ctx.experiment("oracle_sparse_lasso", **base, s=p["lasso_s"], sigma=p["sigma"], model="lasso",
                             signal_model="rademacher_support", level_rule="lambda_star",
                             trials=p["trials"], checks=["oracle_sparse"]),
    ]
    return results + _oracle_identity(ctx)


@Suites.register("oracle_general")
async def oracle_general_suite(ctx: SuiteContext) -> List[AssertionResult]:
    p = ctx.params
    base = _hadamard_fields(p)
    signal = {"kind": "power_decay", "exponent": p["exponent"], "amplitude": p["amplitude"]}
    lq_matrix = gaussian_ensemble(int(p["lq_m"]), int(p["lq_n"]), ctx.next_seed(), ScaleMode.RAW_OVER_SQRT_M)
    return [
        await ctx.experiment("high_noise_ds", **base, s=1, sigma=p["sigma"], model="ds",
                             signal_model=signal, level_rule="eta_star", trials=p["trials"],
                             checks=["high_noise"]),
        await ctx.experiment("high_noise_lasso", **base, s=1, sigma=p["sigma"], model="lasso",
                             signal_model=signal, level_rule="lambda_star", trials=p["trials"],
                             checks=["high_noise"]),
        ctx.property("lq_gaussian", "lq", lq_matrix, {"scaled": True}, int(p["lq_samples"])),
    ]


@Suites.register("minimax_chain")
async def minimax_chain_suite(ctx: SuiteContext) -> List[AssertionResult]:
    """
    sigma^2 trace((A_S^T A_S)^{-1}) >= s sigma^2 / (1 + (s-1) mu) 且 lambda_max <= 1 + (s-1) mu
    """
    p = ctx.params
    m, n, sigma = int(p["m"]), int(p["n"]), float(p["sigma"])
    supports, max_s = int(p["supports"]), int(p["max_s"])
    rng = make_generator(ctx.next_seed())
    failures, worst = 0, np.inf
    for i in range(supports):
        matrix = gaussian_ensemble(m, n, derived_seed(ctx.seed, 1000 + i))
        s = 1 + i % max_s
        floor = minimax_trace_floor(matrix, rng.choice(n, size=s, replace=False), sigma)
        lower = minimax_expectation_lower(coherence(matrix), s, sigma)
        chain = floor.holds and (not lower.applicable or floor.trace_value >= lower.value * (1.0 - 1e-12))
        failures += not chain
        worst = min(worst, floor.trace_value - floor.closed_form, floor.spectral_upper - floor.max_eig)
    return [AssertionResult(name="trace_floor", passed=failures == 0, samples=supports, failures=failures,
                            worst_slack=float(worst))]


@Suites.register("rnsp")
async def rnsp_suite(ctx: SuiteContext) -> List[AssertionResult]:
    p = ctx.params
    matrix = identity_hadamard_ensemble(int(p["m"]))
    return [ctx.property("rnsp", "rnsp", matrix, {"s": p["s"], "iota": p["iota"]}, int(p["samples"]))]


@Suites.register("lq")
async def lq_suite(ctx: SuiteContext) -> List[AssertionResult]:
    p = ctx.params
    matrix = gaussian_ensemble(int(p["m"]), int(p["n"]), ctx.next_seed(), ScaleMode.RAW_OVER_SQRT_M)
    return [ctx.property("lq", "lq", matrix, {"scaled": True}, int(p["samples"]))]


@Suites.register("cone")
async def cone_suite(ctx: SuiteContext) -> List[AssertionResult]:
    p = ctx.params
    matrix = identity_hadamard_ensemble(int(p["m"]))
    return [
        ctx.property("cone_lasso", "cone-lasso", matrix, {"s": p["lasso_s"], "sigma": p["sigma"]},
                     int(p["samples"])),
        ctx.property("cone_ds", "cone-ds", matrix, {"s": p["ds_s"], "sigma": p["sigma"]}, int(p["samples"])),
    ]


async def verify_bound_suite(name: str, seed: Optional[int] = None, overrides: Optional[Dict[str, Any]] = None,
                             cfg: Optional[CN] = None) -> SuiteReport:
    """
    运行验证套件

    参数:
        name: stable / gaussian_sparse / oracle_sparse / oracle_general / minimax_chain / rnsp / lq / cone
        seed: 种子，缺省取 RNG.SEED
        overrides: 覆盖默认参数
        cfg: 全局配置

    返回:
        SuiteReport，全部断言通过时 passed 为 True
    """
    suite: Callable[[SuiteContext], Awaitable[List[AssertionResult]]] = Suites.require(name)
    cfg = cfg if cfg is not None else load_config()
    params = copy.deepcopy(suite_defaults(name))
    params.update(overrides or {})
    seed = int(cfg.RNG.SEED if seed is None else seed)

    logger.info(f"[verify_bound_suite] 运行套件: {name}, seed={seed}")
    assertions = await suite(SuiteContext(name, params, seed, cfg))
    passed = all(a.passed for a in assertions)
    for a in assertions:
        level = logging.INFO if a.passed else logging.ERROR
        logger.log(level, f"[verify_bound_suite] {name}.{a.name}: passed={a.passed}, "
                          f"failures={a.failures}/{a.samples} {a.detail}")
    return SuiteReport(suite=name, passed=passed, assertions=assertions)
