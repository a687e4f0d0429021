# -*- coding: utf-8 -*-
'''
一阶原始-对偶分裂（Chambolle-Pock）

求解 min ||x||_1  s.t.  Kx ∈ C，C 为单点、球或盒。
子类给出 K、C 上的投影、对偶目标与精修候选；收敛以对偶间隙证书判定。
'''

import logging
from abc import abstractmethod
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

import numpy as np

from utils.protocol import SolveOutcome, SolverConfig
from .engineBase import BaseSolver, lipschitz_constant, soft_threshold

# 配置日志
logger = logging.getLogger(__name__)

# 精修时的支撑阈值（相对 max|x|）
SUPPORT_THRESHOLDS = (1e-3, 1e-6, 1e-9)
STEP_SAFETY = 0.99


@dataclass
class Program:
    """
    单次求解的问题数据，不在引擎实例上保存，便于多线程共享引擎
    """
    A: np.ndarray
    b: np.ndarray
    level: float
    K: np.ndarray = None
    center: np.ndarray = None
    extra: dict = field(default_factory=dict)


@dataclass
class Certificate:
    x: np.ndarray
    w: np.ndarray
    primal_residual: float
    optimality_residual: float
    objective: float

    def converged(self, tolerance: float) -> bool:
        return self.primal_residual <= tolerance and self.optimality_residual <= tolerance

    def score(self) -> float:
        return max(self.primal_residual, self.optimality_residual)


def candidate_supports(x: np.ndarray, limit: Optional[int] = None) -> Iterator[np.ndarray]:
    """
    按相对阈值依次给出不同的候选支撑集
    """
    peak = float(np.max(np.abs(x))) if x.size else 0.0
    if peak == 0.0:
        return
    seen = set()
    for threshold in SUPPORT_THRESHOLDS:
        support = np.flatnonzero(np.abs(x) > threshold * peak)
        key = tuple(support)
        if key in seen or (limit is not None and support.size > limit):
            continue
        seen.add(key)
        yield support


class PrimalDualSolver(BaseSolver):
    """
    l1 极小化约束规划的原始-对偶求解器基类
    """
    def _solve(self, A: np.ndarray, b: np.ndarray, level: Optional[float], cfg: SolverConfig) -> SolveOutcome:
        program = self._build(A, b, level, cfg)
        trivial = self._trivial(program, cfg)
        if trivial is not None:
            return trivial
        return self._iterate(program, cfg)

    @abstractmethod
    def _build(self, A: np.ndarray, b: np.ndarray, level: Optional[float], cfg: SolverConfig) -> Program:
        """
        构造 K、C 等问题数据，并做可行性预检
        """
        pass

    @abstractmethod
    def _project(self, program: Program, v: np.ndarray) -> np.ndarray:
        """
        到约束集合 C 的投影
        """
        pass

    @abstractmethod
    def _dual_value(self, program: Program, w: np.ndarray) -> float:
        """
        对偶可行点 w（||K^T w||_inf <= 1）处的对偶目标
        """
        pass

    @abstractmethod
    def _primal_residual(self, program: Program, x: np.ndarray) -> float:
        pass

    def _trivial(self, program: Program, cfg: SolverConfig) -> Optional[SolveOutcome]:
        return None

    def _polish(self, program: Program, x: np.ndarray, w: np.ndarray) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        """
        固定支撑与符号后直接求解限制最优性方程，给出 (x, w) 候选
        """
        return iter(())

    def _finalize(self, program: Program, certificate: Certificate, cfg: SolverConfig) -> Certificate:
        return certificate

    def _operator_norm(self, program: Program, cfg: SolverConfig) -> float:
        return float(np.sqrt(lipschitz_constant(program.K, cfg.power_iterations, cfg.power_tolerance)))

    def certify(self, program: Program, x: np.ndarray, w: np.ndarray) -> Certificate:
        """
        计算原始残差与相对对偶间隙

        参数:
            program: 问题数据
            x: 原始点
            w: 对偶点，先缩放到 ||K^T w||_inf <= 1

        返回:
            Certificate
        """
        scale = max(1.0, float(np.max(np.abs(program.K.T @ w))) if w.size else 1.0)
        dual = self._dual_value(program, w / scale)
        objective = float(np.sum(np.abs(x)))
        gap = abs(objective - dual) / max(1.0, objective)
        return Certificate(x=x, w=w / scale, primal_residual=self._primal_residual(program, x),
                           optimality_residual=gap, objective=objective)

    def _best_candidate(self, program: Program, x: np.ndarray, w: np.ndarray) -> Certificate:
        best = self.certify(program, x, w)
        for x_polished, w_polished in self._polish(program, x, w):
            for dual in (w_polished, w):
                if dual is None:
                    continue
                candidate = self.certify(program, x_polished, dual)
                if candidate.score() < best.score():
                    best = candidate
        return best

    def _outcome(self, program: Program, certificate: Certificate, iterations: int,
                 cfg: SolverConfig) -> SolveOutcome:
        return SolveOutcome(
            model=self.MODEL,
            estimate=certificate.x,
            iterations=iterations,
            converged=certificate.converged(cfg.tolerance),
            primal_residual=certificate.primal_residual,
            optimality_residual=certificate.optimality_residual,
            objective=certificate.objective,
            level=program.level,
        )

    def _iterate(self, program: Program, cfg: SolverConfig) -> SolveOutcome:
        K = program.K
        n = K.shape[1]
        norm_K = self._operator_norm(program, cfg)
        sigma = cfg.dual_step_scale / norm_K
        tau = STEP_SAFETY / (cfg.dual_step_scale * norm_K)

        x = np.zeros(n)
        y = np.zeros(K.shape[0])
        Kt_y = np.zeros(n)
        best: Optional[Certificate] = None
        iterations = 0
        for iterations in range(1, cfg.max_iterations + 1):
            x_new = soft_threshold(x - tau * Kt_y, tau)
            x_bar = 2.0 * x_new - x
            v = y + sigma * (K @ x_bar)
            y = v - sigma * self._project(program, v / sigma)
            Kt_y = K.T @ y
            x = x_new

            if iterations % cfg.check_every == 0 or iterations == cfg.max_iterations:
                candidate = self._best_candidate(program, x, -y)
                if best is None or candidate.score() < best.score():
                    best = candidate
                if best.converged(cfg.tolerance):
                    break

        best = self._finalize(program, best, cfg)
        return self._outcome(program, best, iterations, cfg)


def lstsq(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return np.linalg.lstsq(matrix, rhs, rcond=None)[0]


def sign_consistent(values: np.ndarray, signs: np.ndarray) -> bool:
    return bool(np.all(np.sign(values) == signs))


__all__: List[str] = ["PrimalDualSolver", "Program", "Certificate", "candidate_supports", "lstsq", "sign_consistent"]
