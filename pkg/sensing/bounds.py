# -*- coding: utf-8 -*-
'''
闭式误差界

每个界都是 (mu, s, 噪声水平, n, 尾部范数) 的纯函数；MIP 条件不成立时返回 applicable=False，
不抛异常。对数一律取自然对数。
'''

import functools
import logging
import math
from typing import Any, Callable, Dict, Optional

import numpy as np
from scipy import linalg

from utils.exceptions import EmptySupport, InvalidParameter, SingularGram
from utils.protocol import BoundId, BoundReport, MinimaxTraceFloor, ProgramModel
from utils.registry import Registry
from .measurement import MeasurementMatrix, _as_support, coherence

# 配置日志
logger = logging.getLogger(__name__)

ZERO_MU_TEXT = "bound undefined at μ=0"
SINGULAR_TOL = 1e-12

# 界函数注册表，键为 BoundId 的取值
Bounds = Registry()


# 参数校验

def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidParameter(message)


def _check_mu(mu: float) -> float:
    mu = float(mu)
    _require(0.0 <= mu <= 1.0, f"mu 必须位于 [0, 1]: {mu}")
    return mu


def _check_n(n: int) -> int:
    _require(int(n) == n and n >= 2, f"n 必须是不小于 2 的整数: {n}")
    return int(n)


def _check_sparsity(s: float, name: str = "s") -> float:
    _require(s >= 1, f"{name} 必须不小于 1: {s}")
    return s


def _check_nonnegative(value: float, name: str) -> float:
    value = float(value)
    _require(value >= 0.0 and math.isfinite(value), f"{name} 必须非负: {value}")
    return value


def _check_positive(value: float, name: str) -> float:
    value = float(value)
    _require(value > 0.0 and math.isfinite(value), f"{name} 必须为正: {value}")
    return value


def _model(model: Any, allowed) -> ProgramModel:
    model = ProgramModel(model)
    _require(model in allowed, f"不支持的模型: {model}，可选: {[str(m) for m in allowed]}")
    return model


# MIP 条件

def lasso_condition(mu: float, s: float) -> tuple:
    """
    Lasso 条件 mu < 1/(4s)；mu = 0 时分母 mu(1-4s mu) 为零，视为不适用
    """
    if mu == 0.0:
        return False, ZERO_MU_TEXT
    threshold = 1.0 / (4.0 * s)
    if mu < threshold:
        return True, f"μ={mu:.6g} < 1/(4s)={threshold:.6g}"
    return False, f"μ={mu:.6g} ≥ 1/(4s)={threshold:.6g}"


def ds_condition(mu: float, s: float) -> tuple:
    """
    BP/DS/QCBP 条件 mu < 1/(2s-1)
    """
    threshold = 1.0 / (2.0 * s - 1.0)
    if mu < threshold:
        return True, f"μ={mu:.6g} < 1/(2s-1)={threshold:.6g}"
    return False, f"μ={mu:.6g} ≥ 1/(2s-1)={threshold:.6g}"


def spectrum_condition(mu: float, s: float) -> tuple:
    """
    稀疏 Gram 谱下界为正的条件 (s-1)mu < 1
    """
    if (s - 1.0) * mu < 1.0:
        return True, f"(s-1)μ={(s - 1.0) * mu:.6g} < 1"
    return False, f"(s-1)μ={(s - 1.0) * mu:.6g} ≥ 1"


def _report(theorem_id: BoundId, condition: tuple, value: Callable[[], float], inputs: Dict[str, float],
            probability: Optional[float] = None) -> BoundReport:
    applicable, text = condition
    return BoundReport(
        theorem_id=theorem_id,
        value=float(value()) if applicable else None,
        applicable=applicable,
        condition_text=text,
        inputs=inputs,
        probability=probability,
    )


# 正则化水平与概率

def gaussian_width(n: int) -> float:
    """
    sqrt(2 log n)
    """
    return math.sqrt(2.0 * math.log(_check_n(n)))


def event_probability_floor(n: int) -> float:
    """
    P(||A^T z||_inf <= sigma sqrt(2 log n)) 的下界 1 - 1/(2 sqrt(pi log n))
    """
    return 1.0 - 1.0 / (2.0 * math.sqrt(math.pi * math.log(_check_n(n))))


def event_probability_floor_union(n: int) -> float:
    """
    双侧尾部的并集界 1 - 1/sqrt(pi log n)，作为频率检查的判定下界
    """
    return 1.0 - 1.0 / math.sqrt(math.pi * math.log(_check_n(n)))


def regularization_levels(sigma: float, n: int) -> Dict[str, float]:
    """
    三个正则化水平

    参数:
        sigma: 噪声标准差
        n: 信号维数

    返回:
        lambda_star = 2 sigma (5/4 + sqrt(2 log n))，eta_star = sigma (3/2 + sqrt(2 log n))，
        lambda_event = sigma sqrt(2 log n)
    """
    sigma = _check_positive(sigma, "sigma")
    width = gaussian_width(n)
    return {
        "lambda_star": 2.0 * sigma * (1.25 + width),
        "eta_star": sigma * (1.5 + width),
        "lambda_event": sigma * width,
    }


def qcbp_feasibility_level(sigma: float, m: int) -> float:
    """
    高斯噪声以高概率满足 ||z||_2 <= sigma sqrt(m + 2 sqrt(m log m))
    """
    sigma = _check_nonnegative(sigma, "sigma")
    _require(m >= 1, f"m 必须为正: {m}")
    return sigma * math.sqrt(m + 2.0 * math.sqrt(m * math.log(m)))


def _sparsity_limit(m: int, n: int) -> float:
    _require(1 <= m <= n, f"要求 1 <= m <= n: m={m}, n={n}")
    return m / math.log(math.e * n / m)


def s_star(m: int, n: int) -> float:
    """
    s* = m / log(e n / m)

    以 s_star 为参数的界在内部调用 _sparsity_limit
    """
    return _sparsity_limit(m, n)


# 稳定恢复界

def stable_error_bound(model: Any, mu: float, s: int, level: float, tail1: float) -> BoundReport:
    """
    ||x_hat - x||_2 的稳定恢复界

    参数:
        model: lasso / ds / qcbp
        mu: 相干性
        s: 稀疏度
        level: lambda（lasso）或 eta（ds/qcbp）
        tail1: ||x_{-max(s)}||_1

    返回:
        BoundReport
    """
    model = _model(model, (ProgramModel.LASSO, ProgramModel.DS, ProgramModel.QCBP))
    mu = _check_mu(mu)
    s = _check_sparsity(s)
    level = _check_nonnegative(level, "level")
    tail1 = _check_nonnegative(tail1, "tail1")
    inputs = {"mu": mu, "s": s, "level": level, "tail1": tail1}
    root_s = math.sqrt(s)

    if model == ProgramModel.LASSO:
        def value():
            gap = 1.0 - 4.0 * s * mu
            return (15.0 * root_s / (8.0 * mu * gap) * level
                    + (2.0 * (1.0 + 2.0 * s) * mu / gap + 0.5) * 2.0 * tail1 / root_s)
        return _report(BoundId.STABLE_LASSO, lasso_condition(mu, s), value, inputs)

    def value():
        gap = 1.0 - (2.0 * s - 1.0) * mu
        if model == ProgramModel.DS:
            noise = 2.0 * math.sqrt(2.0) * root_s / gap
        else:
            noise = 2.0 * math.sqrt(2.0) * math.sqrt(1.0 + (s - 1.0) * mu) / gap
        tail = (math.sqrt(2.0) * s * mu / gap + 1.0 / (2.0 * math.sqrt(2.0))) * 2.0 * tail1 / root_s
        return noise * level + tail

    theorem_id = BoundId.STABLE_DS if model == ProgramModel.DS else BoundId.STABLE_QCBP
    return _report(theorem_id, ds_condition(mu, s), value, inputs)


def gaussian_sparse_bound(model: Any, mu: float, s: int, sigma: float, n: int) -> BoundReport:
    """
    高斯噪声下 s-稀疏信号 ||x_hat - x||_2^2 的上界及其概率
    """
    model = _model(model, (ProgramModel.DS, ProgramModel.LASSO))
    mu = _check_mu(mu)
    s = _check_sparsity(s)
    sigma = _check_positive(sigma, "sigma")
    n = _check_n(n)
    inputs = {"mu": mu, "s": s, "sigma": sigma, "n": n}
    log_n = math.log(n)
    probability = event_probability_floor(n)

    if model == ProgramModel.DS:
        return _report(BoundId.GAUSSIAN_DS, ds_condition(mu, s),
                       lambda: 16.0 * log_n / (1.0 - (2.0 * s - 1.0) * mu) ** 2 * s * sigma ** 2,
                       inputs, probability)
    return _report(BoundId.GAUSSIAN_LASSO, lasso_condition(mu, s),
                   lambda: 32.0 * log_n / (mu * (1.0 - 4.0 * s * mu)) ** 2 * s * sigma ** 2,
                   inputs, probability)


# 极小极大下界

def minimax_expectation_lower(mu: float, s: int, sigma: float) -> BoundReport:
    """
    任意估计量的期望风险下界 s sigma^2 / (1 + (s-1) mu)
    """
    mu = _check_mu(mu)
    s = _check_sparsity(s)
    sigma = _check_positive(sigma, "sigma")
    return _report(BoundId.MINIMAX_EXPECTATION, spectrum_condition(mu, s),
                   lambda: s * sigma ** 2 / (1.0 + (s - 1.0) * mu),
                   {"mu": mu, "s": s, "sigma": sigma})


def minimax_probability_lower(mu: float, s: int, sigma: float, n: int) -> BoundReport:
    """
    以概率至少 1 - exp(-ns/16) 成立的平方误差下界 n s sigma^2 / (2(1 + (s-1) mu))
    """
    mu = _check_mu(mu)
    s = _check_sparsity(s)
    sigma = _check_positive(sigma, "sigma")
    _require(int(n) == n and n >= 1, f"n 必须是正整数: {n}")
    return _report(BoundId.MINIMAX_PROBABILITY, spectrum_condition(mu, s),
                   lambda: n * s * sigma ** 2 / (2.0 * (1.0 + (s - 1.0) * mu)),
                   {"mu": mu, "s": s, "sigma": sigma, "n": n},
                   probability=1.0 - math.exp(-n * s / 16.0))


def minimax_trace_floor(M: MeasurementMatrix, S, sigma: float) -> MinimaxTraceFloor:
    """
    sigma^2 trace((A_S^T A_S)^{-1}) 与闭式下界 s sigma^2 / (1 + (s-1) mu) 的比较

    参数:
        M: 列归一化测量矩阵
        S: 支撑集
        sigma: 噪声标准差

    返回:
        MinimaxTraceFloor，holds 同时要求 lambda_max <= 1 + (s-1) mu
    """
    sigma = _check_positive(sigma, "sigma")
    support = _as_support(S, M.n)
    if support.size == 0:
        raise EmptySupport("支撑集为空")
    mu = coherence(M)
    A_S = M.entries[:, support]
    eigenvalues = linalg.eigvalsh(A_S.T @ A_S)
    if eigenvalues[0] <= SINGULAR_TOL * max(1.0, eigenvalues[-1]):
        raise SingularGram(f"Gram 子矩阵奇异: lambda_min={eigenvalues[0]:.3e}")
    s = support.size
    trace_value = sigma ** 2 * float(np.sum(1.0 / eigenvalues))
    closed_form = s * sigma ** 2 / (1.0 + (s - 1) * mu)
    spectral_upper = 1.0 + (s - 1) * mu
    max_eig = float(eigenvalues[-1])
    holds = trace_value >= closed_form * (1.0 - 1e-12) and max_eig <= spectral_upper + 1e-12
    return MinimaxTraceFloor(trace_value=trace_value, closed_form=closed_form, max_eig=max_eig,
                             spectral_upper=spectral_upper, holds=holds)


# 预言不等式

def _oracle_factor(n: int, shift: float) -> float:
    return (shift + gaussian_width(n)) ** 2


def oracle_bound_sparse(model: Any, mu: float, s: int, n: int, effective_risk: float,
                        sigma: Optional[float] = None) -> BoundReport:
    """
    s-稀疏信号的预言不等式，effective_risk = sum_j min(sigma^2, x_j^2)

    给出 sigma 时，DS 的放宽形式 C (sigma^2 + risk) 记录在 inputs["relaxed_value"]
    """
    model = _model(model, (ProgramModel.DS, ProgramModel.LASSO))
    mu = _check_mu(mu)
    s = _check_sparsity(s)
    n = _check_n(n)
    effective_risk = _check_nonnegative(effective_risk, "effective_risk")
    inputs = {"mu": mu, "s": s, "n": n, "effective_risk": effective_risk}
    probability = event_probability_floor(n)
    factor = _oracle_factor(n, 2.0)

    if model == ProgramModel.DS:
        condition = ds_condition(mu, s)
        constant = lambda: 8.0 * factor / (1.0 - (2.0 * s - 1.0) * mu) ** 2
        if condition[0] and sigma is not None:
            sigma = _check_positive(sigma, "sigma")
            inputs["sigma"] = sigma
            inputs["relaxed_value"] = constant() * (sigma ** 2 + effective_risk)
        return _report(BoundId.ORACLE_SPARSE_DS, condition, lambda: constant() * effective_risk,
                       inputs, probability)
    return _report(BoundId.ORACLE_SPARSE_LASSO, lasso_condition(mu, s),
                   lambda: 16.0 * factor / (mu * (1.0 - 4.0 * s * mu)) ** 2 * effective_risk,
                   inputs, probability)


def general_ratio(model: Any, mu: float, s_star_value: float) -> float:
    """
    一般信号界中的比值因子

    lasso: (2 + 34 mu (4 - 3(s*-1) mu)) sqrt(1 + (s*-1) mu) / (mu (1 - 4 s* mu))
    ds:    (138 - 34 (4 s* - 1) mu) sqrt(1 + (s*-1) mu) / (1 - (2 s* - 1) mu)
    """
    model = ProgramModel(model)
    spread = math.sqrt(1.0 + (s_star_value - 1.0) * mu)
    if model == ProgramModel.LASSO:
        return ((2.0 + 34.0 * mu * (4.0 - 3.0 * (s_star_value - 1.0) * mu)) * spread
                / (mu * (1.0 - 4.0 * s_star_value * mu)))
    return (138.0 - 34.0 * (4.0 * s_star_value - 1.0) * mu) * spread / (1.0 - (2.0 * s_star_value - 1.0) * mu)


def oracle_bound_general(model: Any, mu: float, s_star: float, n: int, head_risk: float, tail2sq: float,
                         m: Optional[int] = None) -> BoundReport:
    """
    一般（非稀疏）信号的预言不等式

    参数:
        model: ds / lasso
        mu: 相干性
        s_star: s*
        n: 信号维数
        head_risk: sum_{j in supp(x_max(s*))} min(sigma^2, x_j^2)
        tail2sq: ||x_{-max(s*)}||_2^2
        m: 测量数；给出时附带概率下界并检查 s* <= m / log(en/m)
    """
    model = _model(model, (ProgramModel.DS, ProgramModel.LASSO))
    mu = _check_mu(mu)
    s_star_value = float(_check_sparsity(s_star, "s_star"))
    n = _check_n(n)
    head_risk = _check_nonnegative(head_risk, "head_risk")
    tail2sq = _check_nonnegative(tail2sq, "tail2sq")
    inputs = {"mu": mu, "s_star": s_star_value, "n": n, "head_risk": head_risk, "tail2sq": tail2sq}

    if model == ProgramModel.DS:
        theorem_id, condition = BoundId.ORACLE_GENERAL_DS, ds_condition(mu, s_star_value)
        constant = lambda: 6.0 * general_ratio(model, mu, s_star_value) ** 2 * _oracle_factor(n, 2.0)
    else:
        theorem_id, condition = BoundId.ORACLE_GENERAL_LASSO, lasso_condition(mu, s_star_value)
        constant = lambda: 24.0 * general_ratio(model, mu, s_star_value) ** 2 * _oracle_factor(n, 1.25)

    probability = None
    if m is not None:
        inputs["m"] = m
        limit = _sparsity_limit(m, n)
        inputs["s_star_limit"] = limit
        probability = max(0.0, 1.0 - math.exp(-m / 100.0) - 1.0 / (2.0 * math.sqrt(math.pi * math.log(n))))
        if condition[0] and s_star_value > limit:
            condition = (False, f"s*={s_star_value:.6g} > m/log(en/m)={limit:.6g}")
    return _report(theorem_id, condition, lambda: constant() * (head_risk + tail2sq), inputs, probability)


def high_noise_bound(model: Any, mu: float, s_bar: int, n: int, effective_risk: float) -> BoundReport:
    """
    高噪声情形，常数为稀疏预言不等式的两倍
    """
    model = _model(model, (ProgramModel.DS, ProgramModel.LASSO))
    mu = _check_mu(mu)
    s_bar = _check_sparsity(s_bar, "s_bar")
    n = _check_n(n)
    effective_risk = _check_nonnegative(effective_risk, "effective_risk")
    inputs = {"mu": mu, "s_bar": s_bar, "n": n, "effective_risk": effective_risk}
    probability = event_probability_floor(n)
    factor = _oracle_factor(n, 2.0)
    if model == ProgramModel.DS:
        return _report(BoundId.HIGH_NOISE_DS, ds_condition(mu, s_bar),
                       lambda: 16.0 * factor / (1.0 - (2.0 * s_bar - 1.0) * mu) ** 2 * effective_risk,
                       inputs, probability)
    return _report(BoundId.HIGH_NOISE_LASSO, lasso_condition(mu, s_bar),
                   lambda: 32.0 * factor / (mu * (1.0 - 4.0 * s_bar * mu)) ** 2 * effective_risk,
                   inputs, probability)


def low_noise_bound(model: Any, mu: float, s_star: float, level: float, tail2: float) -> BoundReport:
    """
    低噪声情形 ||x_hat - x||_2（非平方）的界，level 为 lambda*（lasso）或 eta*（ds）
    """
    model = _model(model, (ProgramModel.DS, ProgramModel.LASSO))
    mu = _check_mu(mu)
    s_star_value = float(_check_sparsity(s_star, "s_star"))
    level = _check_nonnegative(level, "level")
    tail2 = _check_nonnegative(tail2, "tail2")
    inputs = {"mu": mu, "s_star": s_star_value, "level": level, "tail2": tail2}
    if model == ProgramModel.DS:
        theorem_id, condition = BoundId.LOW_NOISE_DS, ds_condition(mu, s_star_value)
    else:
        theorem_id, condition = BoundId.LOW_NOISE_LASSO, lasso_condition(mu, s_star_value)
    return _report(theorem_id, condition,
                   lambda: general_ratio(model, mu, s_star_value) * (math.sqrt(s_star_value) * level + tail2),
                   inputs)


# 注册表: BoundId -> 以关键字参数调用的函数

Bounds.register(str(BoundId.STABLE_LASSO), functools.partial(stable_error_bound, ProgramModel.LASSO))
Bounds.register(str(BoundId.STABLE_DS), functools.partial(stable_error_bound, ProgramModel.DS))
Bounds.register(str(BoundId.STABLE_QCBP), functools.partial(stable_error_bound, ProgramModel.QCBP))
Bounds.register(str(BoundId.GAUSSIAN_DS), functools.partial(gaussian_sparse_bound, ProgramModel.DS))
Bounds.register(str(BoundId.GAUSSIAN_LASSO), functools.partial(gaussian_sparse_bound, ProgramModel.LASSO))
Bounds.register(str(BoundId.MINIMAX_EXPECTATION), minimax_expectation_lower)
Bounds.register(str(BoundId.MINIMAX_PROBABILITY), minimax_probability_lower)
Bounds.register(str(BoundId.ORACLE_SPARSE_DS), functools.partial(oracle_bound_sparse, ProgramModel.DS))
Bounds.register(str(BoundId.ORACLE_SPARSE_LASSO), functools.partial(oracle_bound_sparse, ProgramModel.LASSO))
Bounds.register(str(BoundId.ORACLE_GENERAL_DS), functools.partial(oracle_bound_general, ProgramModel.DS))
Bounds.register(str(BoundId.ORACLE_GENERAL_LASSO), functools.partial(oracle_bound_general, ProgramModel.LASSO))
Bounds.register(str(BoundId.HIGH_NOISE_DS), functools.partial(high_noise_bound, ProgramModel.DS))
Bounds.register(str(BoundId.HIGH_NOISE_LASSO), functools.partial(high_noise_bound, ProgramModel.LASSO))
Bounds.register(str(BoundId.LOW_NOISE_DS), functools.partial(low_noise_bound, ProgramModel.DS))
Bounds.register(str(BoundId.LOW_NOISE_LASSO), functools.partial(low_noise_bound, ProgramModel.LASSO))


def evaluate_bound(theorem_id: Any, params: Dict[str, Any]) -> BoundReport:
    """
    按标识与关键字参数求值

    参数:
        theorem_id: BoundId 或其取值
        params: 关键字参数，例如 {"mu": 0.125, "s": 1, "level": 0.1, "tail1": 0}

    返回:
        BoundReport
    """
    bound = Bounds.require(str(BoundId(theorem_id)))
    try:
        return bound(**params)
    except TypeError as e:
        raise InvalidParameter(f"{theorem_id} 参数错误: {e}") from e
