# -*- coding: utf-8 -*-
'''
Lasso: min lambda ||x||_1 + 1/2 ||Ax - b||_2^2

单调加速近端梯度（MFISTA），步长 1/L；L 由幂迭代估计或回溯搜索得到。
'''

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from utils.exceptions import InvalidParameter
from utils.protocol import ProgramModel, SolveOutcome, SolverConfig, StepRule
from ..builder import SolverEngines
from ..engineBase import BaseSolver, lipschitz_constant, soft_threshold
from ..primalDual import candidate_supports, sign_consistent

# 配置日志
logger = logging.getLogger(__name__)

__all__ = ["LassoSolver", "lasso_objective", "lasso_kkt_residual"]

BACKTRACK_FACTOR = 2.0
BACKTRACK_START = 0.1
DESCENT_SLACK = 1e-12


def lasso_objective(A: np.ndarray, b: np.ndarray, lam: float, x: np.ndarray) -> float:
    residual = A @ x - b
    return lam * float(np.sum(np.abs(x))) + 0.5 * float(residual @ residual)


def lasso_kkt_residual(A: np.ndarray, b: np.ndarray, lam: float, x: np.ndarray, tolerance: float) -> float:
    """
    次梯度最优性条件的最大相对违反量

    参数:
        A, b, lam: 问题数据
        x: 候选解
        tolerance: |x_j| 超过该值的坐标需满足 (A^T(b-Ax))_j = lam*sign(x_j)

    返回:
        max( (||A^T(b-Ax)||_inf - lam)_+ , max_j |g_j - lam*sign(x_j)| ) / lam
    """
    correlation = A.T @ (b - A @ x)
    worst = max(0.0, float(np.max(np.abs(correlation))) - lam)
    active = np.abs(x) > tolerance
    if np.any(active):
        worst = max(worst, float(np.max(np.abs(correlation[active] - lam * np.sign(x[active])))))
    return worst / lam


@SolverEngines.register("LassoSolver")
class LassoSolver(BaseSolver):
    """
    Lasso 求解器
    """
    MODEL = ProgramModel.LASSO
    LEVEL_NAME = "lambda"

    def _check_level(self, level: Optional[float]) -> Optional[float]:
        level = super()._check_level(level)
        if level == 0.0:
            raise InvalidParameter(f"[{self.__class__.__name__}] lambda 必须为正")
        return level

    def _outcome(self, A, b, lam, x, iterations, cfg, trace) -> SolveOutcome:
        residual = lasso_kkt_residual(A, b, lam, x, cfg.tolerance)
        return SolveOutcome(
            model=self.MODEL,
            estimate=x,
            iterations=iterations,
            converged=residual <= cfg.tolerance,
            primal_residual=0.0,
            optimality_residual=residual,
            objective=lasso_objective(A, b, lam, x),
            level=lam,
            objective_trace=trace,
        )

    def _polish(self, A: np.ndarray, b: np.ndarray, lam: float, x: np.ndarray,
                cfg: SolverConfig) -> Optional[np.ndarray]:
        """
        固定支撑与符号，解 A_S^T A_S x_S = A_S^T b - lam*s
        """
        for support in candidate_supports(x, limit=A.shape[0]):
            A_S = A[:, support]
            signs = np.sign(x[support])
            try:
                x_S = np.linalg.solve(A_S.T @ A_S, A_S.T @ b - lam * signs)
            except np.linalg.LinAlgError:
                continue
            if not sign_consistent(x_S, signs):
                continue
            polished = np.zeros_like(x)
            polished[support] = x_S
            if lasso_kkt_residual(A, b, lam, polished, cfg.tolerance) <= cfg.tolerance:
                return polished
        return None

    def _prox_step(self, A: np.ndarray, b: np.ndarray, lam: float, y: np.ndarray, L: float,
                   backtracking: bool) -> Tuple[np.ndarray, float]:
        """
        在 y 处做一步近端梯度；若下降引理不成立则增大 L
        """
        residual_y = A @ y - b
        smooth_y = 0.5 * float(residual_y @ residual_y)
        gradient = A.T @ residual_y
        while True:
            z = soft_threshold(y - gradient / L, lam / L)
            step = z - y
            residual_z = A @ z - b
            smooth_z = 0.5 * float(residual_z @ residual_z)
            model = smooth_y + float(gradient @ step) + 0.5 * L * float(step @ step)
            if smooth_z <= model + DESCENT_SLACK * max(1.0, abs(model)):
                return z, L
            L *= BACKTRACK_FACTOR
            if not backtracking:
                logger.debug(f"[{self.__class__.__name__}] 幂迭代估计偏小，L 调整为 {L:.6g}")

    def _solve(self, A: np.ndarray, b: np.ndarray, level: Optional[float], cfg: SolverConfig) -> SolveOutcome:
        lam = level
        n = A.shape[1]
        x = np.zeros(n)
        trace: Optional[List[float]] = [lasso_objective(A, b, lam, x)] if cfg.record_trace else None

        if float(np.max(np.abs(A.T @ b))) <= lam:
            return self._outcome(A, b, lam, x, 0, cfg, trace)

        lipschitz = lipschitz_constant(A, cfg.power_iterations, cfg.power_tolerance)
        backtracking = cfg.step_rule == StepRule.BACKTRACKING
        L = lipschitz * BACKTRACK_START if backtracking else lipschitz
        if L == 0.0:
            return self._outcome(A, b, lam, x, 0, cfg, trace)

        y = x.copy()
        t = 1.0
        objective = lasso_objective(A, b, lam, x)
        iterations = 0
        for iterations in range(1, cfg.max_iterations + 1):
            z, L = self._prox_step(A, b, lam, y, L, backtracking)
            objective_z = lasso_objective(A, b, lam, z)
            x_old = x
            # 单调化: 目标上升时保留旧点
            if objective_z <= objective:
                x, objective = z, objective_z
            t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
            y = x + (t / t_new) * (z - x) + ((t - 1.0) / t_new) * (x - x_old)
            t = t_new
            if trace is not None:
                trace.append(objective)

            if iterations % cfg.check_every == 0 or iterations == cfg.max_iterations:
                if lasso_kkt_residual(A, b, lam, x, cfg.tolerance) <= cfg.tolerance:
                    break
                polished = self._polish(A, b, lam, x, cfg)
                if polished is not None:
                    x = polished
                    if trace is not None:
                        trace.append(lasso_objective(A, b, lam, x))
                    break

        return self._outcome(A, b, lam, x, iterations, cfg, trace)
