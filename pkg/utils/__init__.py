# -*- coding: utf-8 -*-
'''
工具类初始化
'''

from .registry import Registry
from .protocol import *
from .exceptions import *
from .configParser import config
from .rng import make_generator, derived_seed
import logging

# 配置日志
logger = logging.getLogger(__name__)
