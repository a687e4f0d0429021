# -*- coding: utf-8 -*-
'''
引擎池，按凸规划类型管理求解器实例
'''

import logging
import threading
from typing import Dict, Optional

from yacs.config import CfgNode as CN

from utils.config import create_engine_config, load_config
from utils.protocol import ProgramModel
from .engineBase import BaseSolver
from .solver import SolverFactory

# 配置日志
logger = logging.getLogger(__name__)


class SolverPool:
    """
    求解器池

    引擎配置位于 configs/engines/solver/<model>.yaml，其 SOLVER 段覆盖全局 SOLVER 段。
    求解器本身无状态，同一实例可被多个线程共享。
    """
    def __init__(self, config: Optional[CN] = None):
        self.cfg = config if config is not None else load_config()
        self.engines: Dict[ProgramModel, BaseSolver] = {}
        self._lock = threading.Lock()

    def getEngine(self, model: ProgramModel) -> BaseSolver:
        """
        获取指定规划类型的求解器，不存在时按配置创建

        参数:
            model: 规划类型

        返回:
            求解器实例
        """
        model = ProgramModel(model)
        with self._lock:
            if model not in self.engines:
                engine_config = create_engine_config(self.cfg, "solver", str(model))
                self.engines[model] = SolverFactory.create(engine_config)
                logger.debug(f"[SolverPool] 创建引擎成功: {model} - {engine_config.NAME}")
            return self.engines[model]

    def listEngines(self) -> Dict[ProgramModel, BaseSolver]:
        return dict(self.engines)


_default_pool: Optional[SolverPool] = None
_default_lock = threading.Lock()


def default_pool() -> SolverPool:
    """
    进程级默认求解器池，首次调用时加载 configs/default.yaml
    """
    global _default_pool
    with _default_lock:
        if _default_pool is None:
            _default_pool = SolverPool()
        return _default_pool
