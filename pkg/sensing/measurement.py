# -*- coding: utf-8 -*-
'''
测量矩阵：构造、列归一化、相干性、稀疏 Gram 谱界与稀疏度预算
'''

import logging
import math
import threading
from typing import Iterable, Optional

import numpy as np
from scipy import linalg

from utils.exceptions import (
    DimensionMismatch,
    EmptySupport,
    InvalidDims,
    NotNormalized,
    NotPowerOfTwo,
    ZeroColumn,
)
from utils.protocol import GramBoundsCheck, ScaleMode, SparsityBudget
from utils.rng import make_generator

# 配置日志
logger = logging.getLogger(__name__)

NORMALIZATION_TOL = 1e-12
ZERO_COLUMN_TOL = 1e-14
SYMMETRY_TOL = 1e-10
SPECTRUM_SLACK = 1e-12


class MeasurementMatrix:
    """
    m x n 实测量矩阵

    构造后不可变；相干性在首次计算时写入缓存（单写者），之后只读。
    """
    __slots__ = ("_entries", "_column_normalized", "_coherence", "_lock")

    def __init__(self, entries: np.ndarray, column_normalized: bool = False,
                 coherence_cache: Optional[float] = None):
        data = np.array(entries, dtype=float)
        if data.ndim != 2:
            raise InvalidDims(f"测量矩阵必须是二维数组: ndim={data.ndim}")
        m, n = data.shape
        if m < 1 or n < 2:
            raise InvalidDims(f"要求 m >= 1 且 n >= 2: {data.shape}")
        if column_normalized:
            norms = np.linalg.norm(data, axis=0)
            worst = int(np.argmax(np.abs(norms - 1.0)))
            if abs(norms[worst] - 1.0) > NORMALIZATION_TOL:
                raise NotNormalized(f"第 {worst} 列范数为 {norms[worst]!r}，与 1 的偏差超过 {NORMALIZATION_TOL}")
        data.setflags(write=False)
        self._entries = data
        self._column_normalized = bool(column_normalized)
        self._coherence = coherence_cache
        self._lock = threading.Lock()

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def m(self) -> int:
        return self._entries.shape[0]

    @property
    def n(self) -> int:
        return self._entries.shape[1]

    @property
    def shape(self):
        return self._entries.shape

    @property
    def column_normalized(self) -> bool:
        return self._column_normalized

    @property
    def coherence_cache(self) -> Optional[float]:
        return self._coherence

    def _store_coherence(self, value: float) -> float:
        with self._lock:
            if self._coherence is None:
                self._coherence = value
            return self._coherence

    def columns(self, support: Iterable[int]) -> np.ndarray:
        """
        子矩阵 A_S
        """
        return self._entries[:, _as_support(support, self.n)]

    def __repr__(self) -> str:
        return (f"MeasurementMatrix(m={self.m}, n={self.n}, "
                f"column_normalized={self._column_normalized}, coherence={self._coherence})")


def _as_support(support: Iterable[int], n: int) -> np.ndarray:
    indices = np.unique(np.asarray(list(support) if not isinstance(support, np.ndarray) else support,
                                   dtype=np.int64).reshape(-1))
    if indices.size and (indices[0] < 0 or indices[-1] >= n):
        raise DimensionMismatch(f"支撑集下标越界: n={n}")
    return indices


def normalize_columns(raw: np.ndarray) -> MeasurementMatrix:
    """
    将每一列缩放为单位 l2 范数

    参数:
        raw: 原始矩阵

    返回:
        column_normalized=True 的测量矩阵，相干性缓存为空
    """
    data = np.array(raw, dtype=float)
    if data.ndim != 2:
        raise InvalidDims(f"测量矩阵必须是二维数组: ndim={data.ndim}")
    norms = np.linalg.norm(data, axis=0)
    small = np.flatnonzero(norms < ZERO_COLUMN_TOL)
    if small.size:
        raise ZeroColumn(int(small[0]))
    return MeasurementMatrix(data / norms, column_normalized=True)


def coherence(M: MeasurementMatrix) -> float:
    """
    相干性 mu = max_{i != j} |<A_i, A_j>|，结果写入缓存
    """
    if not M.column_normalized:
        raise NotNormalized("相干性要求列归一化的矩阵")
    if M.coherence_cache is not None:
        return M.coherence_cache
    gram = M.entries.T @ M.entries
    np.fill_diagonal(gram, 0.0)
    return M._store_coherence(float(np.max(np.abs(gram))))


def coherence_lower_bound(m: int, n: int) -> float:
    """
    相干性的维数下界 sqrt((n - m) / (m (n - 1)))
    """
    if not (1 <= m < n):
        raise InvalidDims(f"要求 n > m >= 1: m={m}, n={n}")
    return math.sqrt((n - m) / (m * (n - 1)))


def gaussian_ensemble(m: int, n: int, seed: int,
                      scale_mode: ScaleMode = ScaleMode.NORMALIZE_COLUMNS,
                      generator: str = "philox") -> MeasurementMatrix:
    """
    高斯随机矩阵

    参数:
        m, n: 维数
        seed: 种子，相同种子得到逐位相同的矩阵
        scale_mode: raw_over_sqrt_m 时整体除以 sqrt(m)（不归一化）；normalize_columns 时逐列归一化
        generator: 随机数发生器名称
    """
    if m < 1 or n < 2:
        raise InvalidDims(f"要求 m >= 1 且 n >= 2: m={m}, n={n}")
    raw = make_generator(seed, name=generator).standard_normal((m, n))
    if ScaleMode(scale_mode) == ScaleMode.RAW_OVER_SQRT_M:
        return MeasurementMatrix(raw / math.sqrt(m), column_normalized=False)
    return normalize_columns(raw)


def identity_hadamard_ensemble(m: int) -> MeasurementMatrix:
    """
    [I | H / sqrt(m)]，H 为 Sylvester 构造的 Hadamard 矩阵，相干性恰为 1/sqrt(m)
    """
    if m < 2 or (m & (m - 1)) != 0:
        raise NotPowerOfTwo(f"m 必须是不小于 2 的 2 的幂: {m}")
    hadamard = linalg.hadamard(m, dtype=float) / math.sqrt(m)
    entries = np.hstack([np.eye(m), hadamard])
    return MeasurementMatrix(entries, column_normalized=True, coherence_cache=1.0 / math.sqrt(m))


def gram_eigen_range(gram: np.ndarray) -> tuple:
    """
    对称 Gram 矩阵的最小/最大特征值；s <= 2 使用闭式
    """
    s = gram.shape[0]
    if s == 1:
        return float(gram[0, 0]), float(gram[0, 0])
    if np.max(np.abs(gram - gram.T)) > SYMMETRY_TOL:
        raise ValueError("Gram 矩阵不对称")
    gram = 0.5 * (gram + gram.T)
    if s == 2:
        mean = 0.5 * (gram[0, 0] + gram[1, 1])
        radius = math.hypot(0.5 * (gram[0, 0] - gram[1, 1]), gram[0, 1])
        return mean - radius, mean + radius
    eigenvalues = linalg.eigvalsh(gram)
    return float(eigenvalues[0]), float(eigenvalues[-1])


def sparse_gram_bounds_check(M: MeasurementMatrix, S: Iterable[int]) -> GramBoundsCheck:
    """
    检查 1-(s-1)mu <= lambda_min(A_S^T A_S) 且 lambda_max <= 1+(s-1)mu
    """
    support = _as_support(S, M.n)
    if support.size == 0:
        raise EmptySupport("支撑集为空")
    mu = coherence(M)
    s = support.size
    A_S = M.entries[:, support]
    min_eig, max_eig = gram_eigen_range(A_S.T @ A_S)
    lower, upper = 1.0 - (s - 1) * mu, 1.0 + (s - 1) * mu
    holds = bool(lower <= min_eig + SPECTRUM_SLACK and max_eig <= upper + SPECTRUM_SLACK)
    return GramBoundsCheck(lower=lower, upper=upper, min_eig=min_eig, max_eig=max_eig, holds=holds)


def sparsity_budget_from_mu(mu: float, n: int) -> SparsityBudget:
    """
    由相干性反解严格不等式 mu < 1/(2s-1) 与 mu < 1/(4s) 的最大整数 s，上限为 n
    """
    if mu <= 0.0:
        return SparsityBudget(s_bp_ds=n, s_lasso=n)

    def _largest(holds) -> int:
        s = 0
        while s < n and holds(s + 1):
            s += 1
        return s

    s_bp_ds = _largest(lambda s: mu < 1.0 / (2 * s - 1))
    s_lasso = _largest(lambda s: mu < 1.0 / (4 * s))
    return SparsityBudget(s_bp_ds=s_bp_ds, s_lasso=s_lasso)


def sparsity_budget(M: MeasurementMatrix) -> SparsityBudget:
    return sparsity_budget_from_mu(coherence(M), M.n)
