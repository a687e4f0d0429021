# -*- coding: utf-8 -*-
'''
Dantzig 选择器: min ||x||_1  s.t.  ||A^T (b - Ax)||_inf <= eta
'''

import logging
from typing import Iterator, Optional, Tuple

import numpy as np

from utils.protocol import ProgramModel, SolveOutcome, SolverConfig
from ..builder import SolverEngines
from ..engineBase import lipschitz_constant
from ..primalDual import PrimalDualSolver, Program, candidate_supports, lstsq

# 配置日志
logger = logging.getLogger(__name__)

__all__ = ["DantzigSolver"]

# 对偶支撑与原始有效约束的判定阈值
DUAL_THRESHOLDS = (1e-3, 1e-6)
ACTIVE_TOLERANCE = 1e-6


@SolverEngines.register("DantzigSolver")
class DantzigSolver(PrimalDualSolver):
    """
    Dantzig 选择器求解器，K = A^T A，C = 以 A^T b 为中心、半径 eta 的盒
    """
    MODEL = ProgramModel.DS
    LEVEL_NAME = "eta"

    def _build(self, A: np.ndarray, b: np.ndarray, level: Optional[float], cfg: SolverConfig) -> Program:
        gram = A.T @ A
        return Program(A=A, b=b, level=level, K=gram, center=A.T @ b)

    def _operator_norm(self, program: Program, cfg: SolverConfig) -> float:
        return lipschitz_constant(program.A, cfg.power_iterations, cfg.power_tolerance)

    def _trivial(self, program: Program, cfg: SolverConfig) -> Optional[SolveOutcome]:
        if np.max(np.abs(program.center)) <= program.level:
            zero = np.zeros(program.A.shape[1])
            return self._outcome(program, self.certify(program, zero, np.zeros_like(zero)), 0, cfg)
        return None

    def _project(self, program: Program, v: np.ndarray) -> np.ndarray:
        return np.clip(v, program.center - program.level, program.center + program.level)

    def _dual_value(self, program: Program, w: np.ndarray) -> float:
        return float(program.center @ w) - program.level * float(np.sum(np.abs(w)))

    def _primal_residual(self, program: Program, x: np.ndarray) -> float:
        correlation = program.center - program.K @ x
        return max(0.0, float(np.max(np.abs(correlation))) - program.level)

    def _active_sets(self, program: Program, x: np.ndarray, w: np.ndarray) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        seen = set()
        peak = float(np.max(np.abs(w))) if w.size else 0.0
        if peak > 0.0:
            for threshold in DUAL_THRESHOLDS:
                active = np.flatnonzero(np.abs(w) > threshold * peak)
                if tuple(active) not in seen:
                    seen.add(tuple(active))
                    yield active, np.sign(w[active])
        correlation = program.center - program.K @ x
        slack = program.level - np.abs(correlation)
        active = np.flatnonzero(slack <= ACTIVE_TOLERANCE * max(1.0, program.level))
        if active.size and tuple(active) not in seen:
            yield active, np.sign(correlation[active])

    def _polish(self, program: Program, x: np.ndarray, w: np.ndarray) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        gram, center, eta = program.K, program.center, program.level
        supports = list(candidate_supports(x))
        if not supports:
            return
        for active, active_signs in self._active_sets(program, x, w):
            for support in supports:
                # 有效约束取等号: G_{T,S} x_S = c_T - eta t_T
                x_S = lstsq(gram[np.ix_(active, support)], center[active] - eta * active_signs)
                polished = np.zeros_like(x)
                polished[support] = x_S
                # 互补松弛: G_{S,T} w_T = sign(x_S)
                dual = np.zeros_like(w)
                dual[active] = lstsq(gram[np.ix_(support, active)], np.sign(x_S))
                yield polished, dual
