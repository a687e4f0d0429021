# -*- coding: utf-8 -*-
'''
引擎模块初始化
'''

from .builder import SolverEngines
from .solver import SolverFactory
from .enginePool import SolverPool, default_pool
from .solve import solve_bp, solve_dantzig, solve_lasso, solve_program, solve_qcbp
