# -*- coding: utf-8 -*-
'''
求解器工厂类，用于创建不同的求解器引擎实例
'''

from ..builder import SolverEngines
from ..engineBase import BaseSolver
from typing import List
from yacs.config import CfgNode as CN
import logging

# 配置日志
logger = logging.getLogger(__name__)

__all__ = ["SolverFactory"]


class SolverFactory():
    """
    求解器工厂类
    """
    @staticmethod
    def create(config: CN) -> BaseSolver:
        """
        根据配置创建求解器引擎实例

        参数:
            config: 引擎配置，NAME 为注册名

        返回:
            求解器实例
        """
        if config.NAME in SolverEngines.list():
            logger.debug(f"[SolverFactory] 创建引擎: {config.NAME}")
            return SolverEngines.get(config.NAME)(config)
        else:
            raise RuntimeError(f"[SolverFactory] 请检查配置，支持的求解器引擎: {SolverEngines.list()}")

    @staticmethod
    def list() -> List:
        return SolverEngines.list()
