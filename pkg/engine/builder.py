# -*- coding: utf-8 -*-
'''
引擎注册构建器
'''

from utils import Registry

# 求解器引擎注册表，键为配置中的 NAME
SolverEngines = Registry()
