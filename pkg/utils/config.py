# -*- coding: utf-8 -*-
'''
配置管理工具
'''

import os
import logging
from pathlib import Path
from typing import Optional

from yacs.config import CfgNode as CN

from .configParser import ConfigParser

# 配置日志
logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).resolve().parent.parent
CONFIG_DIR = PROJECT_ROOT / "configs"
DEFAULT_CONFIG_FILE = CONFIG_DIR / "default.yaml"

SEED_ENV_VAR = "MIP_RECOVER_SEED"


def get_default_config() -> CN:
    """
    内置默认配置，配置文件缺失时使用
    """
    cfg = CN()
    cfg.NAME = "MipRecover"

    # 随机数发生器
    cfg.RNG = CN()
    cfg.RNG.GENERATOR = "philox"
    cfg.RNG.SEED = 20240501

    # 求解器默认参数
    cfg.SOLVER = CN()
    cfg.SOLVER.TOLERANCE = 1e-8
    cfg.SOLVER.MAX_ITERATIONS = 50000
    cfg.SOLVER.STEP_RULE = "fixed_lipschitz"
    cfg.SOLVER.DUAL_STEP_SCALE = 1.0
    cfg.SOLVER.POWER_ITERATIONS = 30
    cfg.SOLVER.POWER_TOLERANCE = 1e-10
    cfg.SOLVER.CHECK_EVERY = 50
    cfg.SOLVER.RECORD_TRACE = False

    # 实验调度
    cfg.HARNESS = CN()
    cfg.HARNESS.WORKERS = 1
    cfg.HARNESS.MAX_FAILURE_RATE = 0.01

    # 日志
    cfg.LOGGING = CN()
    cfg.LOGGING.LEVEL = "INFO"
    cfg.LOGGING.FILE = "logs/mip_recover.log"
    return cfg


def load_config(config_file: Optional[str] = None) -> CN:
    """
    加载配置文件

    参数:
        config_file: 配置文件路径，默认 configs/default.yaml

    返回:
        冻结的配置对象
    """
    config_file = str(config_file or DEFAULT_CONFIG_FILE)
    cfg = get_default_config()

    if not os.path.exists(config_file):
        logger.warning(f"配置文件不存在: {config_file}，使用默认配置")
    else:
        logger.debug(f"加载配置文件: {config_file}")
        cfg.merge_from_other_cfg(ConfigParser.load_yaml(config_file, freeze=False))

    seed = os.environ.get(SEED_ENV_VAR)
    if seed:
        logger.info(f"{SEED_ENV_VAR}={seed} 覆盖 RNG.SEED")
        cfg.RNG.SEED = int(seed)

    cfg.freeze()
    return cfg


def merge_configs(base_config: CN, override_config: CN) -> CN:
    """
    合并配置，返回新的冻结配置

    参数:
        base_config: 基础配置
        override_config: 覆盖配置
    """
    merged = base_config.clone()
    merged.defrost()
    merged.merge_from_other_cfg(override_config)
    merged.freeze()
    return merged


def create_engine_config(config: CN, engine_type: str, engine_name: str) -> CN:
    """
    创建引擎配置：引擎 YAML 中的 SOLVER 段覆盖全局 SOLVER 段

    参数:
        config: 主配置
        engine_type: 引擎类型目录，例如 'solver'
        engine_name: 引擎配置名，例如 'lasso'

    返回:
        引擎配置，包含 NAME、MODEL 与合并后的 SOLVER
    """
    config_file = CONFIG_DIR / "engines" / engine_type.lower() / f"{engine_name}.yaml"
    if not config_file.exists():
        raise FileNotFoundError(f"引擎配置文件不存在: {config_file}")

    engine_cfg = ConfigParser.load_yaml(str(config_file), freeze=False)
    solver_cfg = config.SOLVER.clone()
    solver_cfg.defrost()
    if "SOLVER" in engine_cfg:
        solver_cfg.merge_from_other_cfg(engine_cfg.SOLVER)
    engine_cfg.SOLVER = solver_cfg
    engine_cfg.freeze()
    return engine_cfg
