# -*- coding: utf-8 -*-
'''
二次约束基追踪（QCBP）: min ||x||_1  s.t.  ||b - Ax||_2 <= eta
'''

import logging
import math
from typing import Iterator, Optional, Tuple

import numpy as np

from utils.protocol import ProgramModel, SolveOutcome, SolverConfig
from ..builder import SolverEngines
from ..primalDual import Certificate, Program, candidate_supports, lstsq, sign_consistent
from .bpSolver import BPSolver

# 配置日志
logger = logging.getLogger(__name__)

__all__ = ["QCBPSolver"]


@SolverEngines.register("QCBPSolver")
class QCBPSolver(BPSolver):
    """
    QCBP 求解器，K = A，C = 以 b 为中心、半径 eta 的球；eta = 0 时退化为 BP
    """
    MODEL = ProgramModel.QCBP
    LEVEL_NAME = "eta"

    def _build(self, A: np.ndarray, b: np.ndarray, level: Optional[float], cfg: SolverConfig) -> Program:
        program = Program(A=A, b=b, level=level, K=A, center=b)
        if np.linalg.norm(b) > level:
            self._check_range(program, cfg)
        return program

    def _trivial(self, program: Program, cfg: SolverConfig) -> Optional[SolveOutcome]:
        if np.linalg.norm(program.b) <= program.level:
            zero = np.zeros(program.A.shape[1])
            return self._outcome(program, self.certify(program, zero, np.zeros_like(program.b)), 0, cfg)
        return None

    def _project(self, program: Program, v: np.ndarray) -> np.ndarray:
        offset = v - program.b
        distance = float(np.linalg.norm(offset))
        if distance <= program.level:
            return v
        return program.b + offset * (program.level / distance)

    def _dual_value(self, program: Program, w: np.ndarray) -> float:
        return float(program.b @ w) - program.level * float(np.linalg.norm(w))

    def _primal_residual(self, program: Program, x: np.ndarray) -> float:
        return max(0.0, float(np.linalg.norm(program.A @ x - program.b)) - program.level)

    def _polish(self, program: Program, x: np.ndarray, w: np.ndarray) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        if program.level == 0.0:
            return BPSolver._polish(self, program, x, w)
        return self._polish_on_sphere(program, x)

    def _polish_on_sphere(self, program: Program, x: np.ndarray) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        A, b, eta = program.A, program.b, program.level
        for support in candidate_supports(x, limit=A.shape[0]):
            A_S = A[:, support]
            signs = np.sign(x[support])
            gram = A_S.T @ A_S
            try:
                x_ls = np.linalg.solve(gram, A_S.T @ b)
                direction = np.linalg.solve(gram, signs)
            except np.linalg.LinAlgError:
                continue
            residual_ls = float(np.sum((b - A_S @ x_ls) ** 2))
            spread = float(np.sum((A_S @ direction) ** 2))
            if spread == 0.0 or eta ** 2 <= residual_ls:
                continue
            # 残差恰好落在球面上: ||r_LS||^2 + beta^2 ||A_S G^{-1} s||^2 = eta^2
            beta = math.sqrt((eta ** 2 - residual_ls) / spread)
            x_S = x_ls - beta * direction
            if not sign_consistent(x_S, signs):
                continue
            polished = np.zeros_like(x)
            polished[support] = x_S
            yield polished, (b - A_S @ x_S) / beta

    def _finalize(self, program: Program, certificate: Certificate, cfg: SolverConfig) -> Certificate:
        if program.level == 0.0:
            return BPSolver._finalize(self, program, certificate, cfg)
        return certificate
