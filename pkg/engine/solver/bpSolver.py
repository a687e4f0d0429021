# -*- coding: utf-8 -*-
'''
基追踪（BP）: min ||x||_1  s.t.  Ax = b
'''

import logging
from typing import Iterator, Optional, Tuple

import numpy as np

from utils.exceptions import InfeasibleError
from utils.protocol import ProgramModel, SolveOutcome, SolverConfig
from ..builder import SolverEngines
from ..primalDual import Certificate, PrimalDualSolver, Program, candidate_supports, lstsq

# 配置日志
logger = logging.getLogger(__name__)

__all__ = ["BPSolver"]


def feasibility_threshold(b: np.ndarray, cfg: SolverConfig) -> float:
    return cfg.tolerance * max(1.0, float(np.linalg.norm(b)))


@SolverEngines.register("BPSolver")
class BPSolver(PrimalDualSolver):
    """
    基追踪求解器，K = A，C = {b}
    """
    MODEL = ProgramModel.BP

    def _build(self, A: np.ndarray, b: np.ndarray, level: Optional[float], cfg: SolverConfig) -> Program:
        program = Program(A=A, b=b, level=level if level is not None else 0.0, K=A, center=b)
        self._check_range(program, cfg)
        return program

    def _check_range(self, program: Program, cfg: SolverConfig) -> None:
        # b 必须在 A 的值域内
        x_ls = lstsq(program.A, program.b)
        residual = float(np.linalg.norm(program.A @ x_ls - program.b))
        if residual > program.level + feasibility_threshold(program.b, cfg):
            raise InfeasibleError(
                f"[{self.__class__.__name__}] 约束不可行: 最小二乘残差 {residual:.3e} 超过 {program.level:.3e}")
        program.extra["least_squares"] = x_ls

    def _trivial(self, program: Program, cfg: SolverConfig) -> Optional[SolveOutcome]:
        if np.linalg.norm(program.b) == 0.0:
            zero = np.zeros(program.A.shape[1])
            return self._outcome(program, self.certify(program, zero, np.zeros_like(program.b)), 0, cfg)
        return None

    def _project(self, program: Program, v: np.ndarray) -> np.ndarray:
        return program.b

    def _dual_value(self, program: Program, w: np.ndarray) -> float:
        return float(program.b @ w)

    def _primal_residual(self, program: Program, x: np.ndarray) -> float:
        return float(np.linalg.norm(program.A @ x - program.b))

    def _polish(self, program: Program, x: np.ndarray, w: np.ndarray) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        A, b = program.A, program.b
        for support in candidate_supports(x, limit=A.shape[0]):
            A_S = A[:, support]
            x_S = lstsq(A_S, b)
            polished = np.zeros_like(x)
            polished[support] = x_S
            # 对偶点满足 A_S^T w = sign(x_S)
            dual = lstsq(A_S.T, np.sign(x_S))
            yield polished, dual

    def _finalize(self, program: Program, certificate: Certificate, cfg: SolverConfig) -> Certificate:
        threshold = feasibility_threshold(program.b, cfg)
        if certificate.primal_residual <= threshold:
            return certificate
        # 投影回仿射集 {x : Ax = b}
        x = certificate.x + lstsq(program.A, program.b - program.A @ certificate.x)
        projected = self.certify(program, x, certificate.w)
        if projected.primal_residual > threshold:
            raise InfeasibleError(
                f"[{self.__class__.__name__}] 迭代点未达到可行性: ||Ax-b||={projected.primal_residual:.3e}",
            )
        return projected
