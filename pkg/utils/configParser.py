# -*- coding: utf-8 -*-
'''
配置解析器
'''

import os
import re
import logging
from typing import Any, Dict

from yacs.config import CfgNode as CN

# 配置日志
logger = logging.getLogger(__name__)

_ENV_PATTERN = re.compile(r"\$\{([^}]+)\}")


class ConfigParser:
    """
    配置解析器，用于加载和解析 YAML 配置文件
    """
    @staticmethod
    def load_yaml(yaml_file: str, freeze: bool = True) -> CN:
        """
        加载YAML配置文件

        参数:
            yaml_file: YAML配置文件路径
            freeze: 是否冻结返回的配置

        返回:
            CN: 配置节点
        """
        if not os.path.exists(yaml_file):
            logger.error(f"配置文件不存在: {yaml_file}")
            raise FileNotFoundError(f"配置文件不存在: {yaml_file}")

        with open(yaml_file, "r", encoding="utf-8") as f:
            config = CN.load_cfg(f)
        config.defrost()
        config.set_new_allowed(True)

        # 处理环境变量
        ConfigParser._process_env_vars(config)

        if freeze:
            config.freeze()
        return config

    @staticmethod
    def _process_env_vars(config: CN) -> None:
        """
        替换配置中的 ${VAR} 引用
        """
        for k, v in config.items():
            if isinstance(v, CN):
                ConfigParser._process_env_vars(v)
            elif isinstance(v, str) and _ENV_PATTERN.search(v):
                def _lookup(matched: re.Match) -> str:
                    env_value = os.environ.get(matched.group(1), "")
                    if not env_value:
                        logger.warning(f"环境变量未设置: {matched.group(1)}")
                    return env_value
                config[k] = _ENV_PATTERN.sub(_lookup, v)

    @staticmethod
    def dict_to_cn(d: Dict[str, Any]) -> CN:
        """
        将字典转换为配置节点
        """
        config = CN(new_allowed=True)
        for k, v in d.items():
            config[k] = ConfigParser.dict_to_cn(v) if isinstance(v, dict) else v
        return config

    @staticmethod
    def cn_to_dict(config: CN) -> Dict[str, Any]:
        """
        将配置节点转换为普通字典
        """
        return {k: ConfigParser.cn_to_dict(v) if isinstance(v, CN) else v for k, v in config.items()}

# 全局配置实例
config = ConfigParser()
