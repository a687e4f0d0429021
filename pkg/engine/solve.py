# -*- coding: utf-8 -*-
'''
四个凸规划的函数式入口
'''

from typing import Optional

import numpy as np

from utils.protocol import ProgramModel, SolveOutcome, SolverConfig
from .engineBase import MatrixLike
from .enginePool import default_pool

__all__ = ["solve_program", "solve_lasso", "solve_bp", "solve_qcbp", "solve_dantzig"]


def solve_program(model: ProgramModel, M: MatrixLike, b: np.ndarray, level: Optional[float] = None,
                  cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    return default_pool().getEngine(model).solve(M, b, level, cfg)


def solve_lasso(M: MatrixLike, b: np.ndarray, lam: float, cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """
    min lambda ||x||_1 + 1/2 ||Ax - b||_2^2
    """
    return solve_program(ProgramModel.LASSO, M, b, lam, cfg)


def solve_bp(M: MatrixLike, b: np.ndarray, cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """
    min ||x||_1  s.t.  Ax = b
    """
    return solve_program(ProgramModel.BP, M, b, None, cfg)


def solve_qcbp(M: MatrixLike, b: np.ndarray, eta: float, cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """
    min ||x||_1  s.t.  ||b - Ax||_2 <= eta
    """
    return solve_program(ProgramModel.QCBP, M, b, eta, cfg)


def solve_dantzig(M: MatrixLike, b: np.ndarray, eta: float, cfg: Optional[SolverConfig] = None) -> SolveOutcome:
    """
    min ||x||_1  s.t.  ||A^T (b - Ax)||_inf <= eta
    """
    return solve_program(ProgramModel.DS, M, b, eta, cfg)
