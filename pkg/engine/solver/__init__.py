# -*- coding: utf-8 -*-
'''
求解器引擎模块
'''

from .solverFactory import SolverFactory

# 导入引擎模块，确保引擎被注册
from .bpSolver import BPSolver
from .qcbpSolver import QCBPSolver
from .dantzigSolver import DantzigSolver
from .lassoSolver import LassoSolver

__all__ = ["SolverFactory", "BPSolver", "QCBPSolver", "DantzigSolver", "LassoSolver"]
