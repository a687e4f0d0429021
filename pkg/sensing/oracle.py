# -*- coding: utf-8 -*-
'''
预言量：噪声以上支撑 S0、预言风险 K(xi, x)、有效维数 tau 与噪声水平分类
'''

import logging
import math
from typing import Iterable, Optional

import numpy as np

from utils.exceptions import DimensionMismatch, InvalidParameter, SupportViolation
from utils.protocol import NoiseRegime, OracleQuantities, SignalSplit
from .geometry import best_s_term

# 配置日志
logger = logging.getLogger(__name__)

SLACK = 1e-12


def _vector(x) -> np.ndarray:
    return np.asarray(x, dtype=float).reshape(-1)


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not sigma > 0.0:
        raise InvalidParameter(f"sigma 必须为正: {sigma}")
    return sigma


def above_noise_support(x, sigma: float) -> np.ndarray:
    """
    S0 = {j : |x_j| >= sigma}，边界取等号时包含
    """
    return np.flatnonzero(np.abs(_vector(x)) >= _check_sigma(sigma))


def restrict(x, support: Iterable[int]) -> np.ndarray:
    """
    x 限制在支撑集上，其余坐标置零
    """
    x = _vector(x)
    restricted = np.zeros_like(x)
    index = np.asarray(list(support) if not isinstance(support, np.ndarray) else support, dtype=np.int64)
    restricted[index] = x[index]
    return restricted


def oracle_risk(xi, x, sigma: float) -> float:
    """
    K(xi, x) = sigma^2 ||xi||_0 + ||x - xi||_2^2
    """
    xi, x = _vector(xi), _vector(x)
    if xi.shape != x.shape:
        raise DimensionMismatch(f"长度不一致: {xi.shape[0]} != {x.shape[0]}")
    difference = x - xi
    return float(sigma) ** 2 * int(np.count_nonzero(xi)) + float(difference @ difference)


def effective_dimension(x, sigma: float) -> float:
    """
    tau = sum_j min(1, x_j^2 / sigma^2)
    """
    sigma = _check_sigma(sigma)
    x = _vector(x)
    return float(np.sum(np.minimum(1.0, (x / sigma) ** 2)))


def k_minimizer(x, sigma: float) -> np.ndarray:
    """
    argmin_xi K(xi, x)：逐坐标硬阈值，x_j^2 >= sigma^2 时保留
    """
    return restrict(x, above_noise_support(x, sigma))


def s_bar(x, sigma: float) -> int:
    """
    s_bar = max(||x_{S0}||_0, ||x_bar||_0)

    x_bar = x_{S0}，两项相等，即 |S0|
    """
    return int(np.count_nonzero(k_minimizer(x, sigma)))


def noise_regime_classify(x, sigma: float, s_star: int) -> NoiseRegime:
    """
    噪声水平分类

    参数:
        x: 信号
        sigma: 噪声标准差
        s_star: 整数 s*，S* 为最佳 s*-项逼近的支撑

    返回:
        High:   K(x_{S0}, x) <= sigma^2 ||x_{S*}||_0
        Low:    否则且 ||x_{S0}||_0 >= ||x_{S*}||_0
        Medium: 否则
    """
    sigma = _check_sigma(sigma)
    if int(s_star) != s_star or s_star < 1:
        raise InvalidParameter(f"s_star 必须是正整数: {s_star}")
    x = _vector(x)
    head_star = best_s_term(x, min(int(s_star), x.size)).head
    count_star = int(np.count_nonzero(head_star))
    x_s0 = restrict(x, above_noise_support(x, sigma))
    if oracle_risk(x_s0, x, sigma) <= sigma ** 2 * count_star:
        return NoiseRegime.HIGH
    if int(np.count_nonzero(x_s0)) >= count_star:
        return NoiseRegime.LOW
    return NoiseRegime.MEDIUM


def split_signal(x, sigma: float, S: Iterable[int]) -> SignalSplit:
    """
    x = x1 + x2，x1 = x_{S0}，x2 = x_{S \\ S0}

    参数:
        x: 信号，支撑须包含于 S
        sigma: 噪声标准差
        S: 指标集

    返回:
        SignalSplit，并检查 ||x2||_1 < sigma |S \\ S0|（S \\ S0 非空时）与 ||x2||_2 <= sigma sqrt(tau)
    """
    sigma = _check_sigma(sigma)
    x = _vector(x)
    support = np.unique(np.asarray(list(S) if not isinstance(S, np.ndarray) else S, dtype=np.int64))
    outside = np.setdiff1d(np.flatnonzero(x), support)
    if outside.size:
        raise SupportViolation(f"信号支撑不在指标集内: {outside.tolist()}")
    s0 = above_noise_support(x, sigma)
    rest = np.setdiff1d(support, s0)
    x1 = restrict(x, s0)
    x2 = restrict(x, rest)
    l1_x2 = float(np.sum(np.abs(x2)))
    l2_x2 = float(np.linalg.norm(x2))
    tau = effective_dimension(x, sigma)
    l1_check = l1_x2 < sigma * rest.size if rest.size else True
    l2_check = l2_x2 <= sigma * math.sqrt(tau) + SLACK
    if not (l1_check and l2_check):
        logger.warning(f"[split_signal] 尾部范数检查未通过: l1={l1_x2:.6g}, l2={l2_x2:.6g}")
    return SignalSplit(x1=x1, x2=x2, l1_x2=l1_x2, l2_x2=l2_x2, l1_check=l1_check, l2_check=l2_check)


def oracle_quantities(x, sigma: float, s_star: Optional[int] = None) -> OracleQuantities:
    """
    汇总 S0、K(x_{S0}, x)、tau 与噪声水平分类；未给出 s_star 时取 max(1, ||x||_0)
    """
    sigma = _check_sigma(sigma)
    x = _vector(x)
    if s_star is None:
        s_star = max(1, int(np.count_nonzero(x)))
    s0 = above_noise_support(x, sigma)
    return OracleQuantities(
        s0=s0,
        k_value=oracle_risk(restrict(x, s0), x, sigma),
        tau=effective_dimension(x, sigma),
        sigma=sigma,
        regime=noise_regime_classify(x, sigma, s_star),
        s_star=int(s_star),
        s_bar=s_bar(x, sigma),
    )
