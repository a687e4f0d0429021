# -*- coding: utf-8 -*-
'''
求解器引擎基类定义
'''

import asyncio
import functools
import logging
import math
from abc import ABCMeta, abstractmethod
from typing import List, Optional, Tuple, Union

import numpy as np
from yacs.config import CfgNode as CN

from sensing.measurement import MeasurementMatrix
from utils.exceptions import DimensionMismatch, InvalidParameter
from utils.protocol import ProgramModel, SolveOutcome, SolverConfig, StepRule

# 配置日志
logger = logging.getLogger(__name__)

LIPSCHITZ_SAFETY = 1.01

MatrixLike = Union[MeasurementMatrix, np.ndarray]


def soft_threshold(x: np.ndarray, t: float) -> np.ndarray:
    """
    软阈值，即 t*||.||_1 的近端算子
    """
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def solver_config_from_cfg(node: CN) -> SolverConfig:
    """
    由 yacs 的 SOLVER 节点构造 SolverConfig
    """
    return SolverConfig(
        tolerance=float(node.TOLERANCE),
        max_iterations=int(node.MAX_ITERATIONS),
        step_rule=StepRule(node.STEP_RULE),
        dual_step_scale=float(node.DUAL_STEP_SCALE),
        power_iterations=int(node.POWER_ITERATIONS),
        power_tolerance=float(node.POWER_TOLERANCE),
        check_every=int(node.CHECK_EVERY),
        record_trace=bool(node.RECORD_TRACE),
    )


def lipschitz_constant(A: np.ndarray, iterations: int = 30, tolerance: float = 1e-10) -> float:
    """
    幂迭代估计 A^T A 的最大特征值

    参数:
        A: 矩阵
        iterations: 最大迭代次数
        tolerance: 相邻两次估计的相对变化阈值

    返回:
        放大 1% 后的估计值，不超过 Frobenius 范数平方
    """
    n = A.shape[1]
    v = np.ones(n) / math.sqrt(n)
    estimate = 0.0
    for _ in range(iterations):
        w = A.T @ (A @ v)
        value = float(np.linalg.norm(w))
        if value == 0.0:
            break
        v = w / value
        settled = abs(value - estimate) <= tolerance * value
        estimate = value
        if settled:
            break
    frobenius = float(np.sum(A * A))
    if estimate == 0.0:
        # 全 1 初值落在零空间
        estimate = frobenius
    return min(estimate * LIPSCHITZ_SAFETY, frobenius)


class BaseSolver(metaclass=ABCMeta):
    """
    所有求解器引擎的基类

    配置中需要 NAME 与 SOLVER 段；SOLVER 段在 setup 时转为 SolverConfig。
    """
    MODEL: ProgramModel = None
    LEVEL_NAME: Optional[str] = None

    def __init__(self, config: CN):
        self.cfg = config
        # 检查必要的配置项
        for key in self.checkKeys():
            if key not in self.cfg:
                raise KeyError(f"[{self.__class__.__name__}] 配置中缺少必要项: {key}")
        self.setup()

    @property
    def name(self) -> str:
        return self.cfg.NAME

    def setup(self):
        self.solver_config = solver_config_from_cfg(self.cfg.SOLVER)

    def checkKeys(self) -> List[str]:
        return ["NAME", "SOLVER"]

    def _prepare(self, M: MatrixLike, b) -> Tuple[np.ndarray, np.ndarray]:
        A = M.entries if isinstance(M, MeasurementMatrix) else np.asarray(M, dtype=float)
        if A.ndim != 2:
            raise DimensionMismatch(f"[{self.__class__.__name__}] 测量矩阵必须是二维数组")
        b = np.asarray(b, dtype=float).reshape(-1)
        if b.shape[0] != A.shape[0]:
            raise DimensionMismatch(f"[{self.__class__.__name__}] b 的长度 {b.shape[0]} 与 m={A.shape[0]} 不一致")
        return A, b

    def _check_level(self, level: Optional[float]) -> Optional[float]:
        """
        校验正则化参数或约束半径，子类可重写
        """
        if self.LEVEL_NAME is None:
            return None
        if level is None:
            raise InvalidParameter(f"[{self.__class__.__name__}] 需要给出 {self.LEVEL_NAME}")
        level = float(level)
        if not math.isfinite(level) or level < 0:
            raise InvalidParameter(f"[{self.__class__.__name__}] {self.LEVEL_NAME} 必须非负: {level}")
        return level

    def solve(self, M: MatrixLike, b, level: Optional[float] = None,
              cfg: Optional[SolverConfig] = None) -> SolveOutcome:
        """
        求解凸规划

        参数:
            M: 测量矩阵
            b: 观测向量，长度 m
            level: lambda（Lasso）或 eta（QCBP/DS），BP 不需要
            cfg: 求解器配置，缺省使用引擎配置

        返回:
            SolveOutcome，未收敛时 converged=False 并返回最好的迭代点
        """
        A, b = self._prepare(M, b)
        level = self._check_level(level)
        cfg = cfg or self.solver_config
        logger.debug(f"[{self.__class__.__name__}] 开始求解: m={A.shape[0]}, n={A.shape[1]}, level={level}")
        outcome = self._solve(A, b, level, cfg)
        if outcome.converged:
            logger.debug(f"[{self.__class__.__name__}] 收敛: iterations={outcome.iterations}, "
                         f"objective={outcome.objective:.6g}")
        else:
            logger.warning(f"[{self.__class__.__name__}] {outcome.iterations} 次迭代后未收敛: "
                           f"primal={outcome.primal_residual:.3e}, optimality={outcome.optimality_residual:.3e}")
        return outcome

    async def run(self, M: MatrixLike, b, level: Optional[float] = None,
                  cfg: Optional[SolverConfig] = None) -> SolveOutcome:
        """
        在默认线程池中运行 solve
        """
        loop = asyncio.get_running_loop()
        return await loop.run_in_executor(None, functools.partial(self.solve, M, b, level, cfg))

    @abstractmethod
    def _solve(self, A: np.ndarray, b: np.ndarray, level: Optional[float], cfg: SolverConfig) -> SolveOutcome:
        """
        子类实现具体算法
        """
        pass
