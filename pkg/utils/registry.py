# -*- coding: utf-8 -*-
'''
注册表实现
'''

import logging
from typing import Any, Callable, List, Optional

# 配置日志
logger = logging.getLogger(__name__)


def _register_generic(module_dict: dict, module_name: str, module: Any) -> None:
    """
    注册模块到字典中，重名直接报错
    """
    if module_name in module_dict:
        raise KeyError(f"模块已注册: {module_name}")
    module_dict[module_name] = module
    logger.debug(f"注册模块: {module_name}")


class Registry(dict):
    """
    注册表类，用于管理求解器引擎、界函数、检查项与验证套件
    """
    def __init__(self, *args, **kwargs):
        super(Registry, self).__init__(*args, **kwargs)

    def register(self, module_name: Optional[str] = None, module: Any = None) -> Optional[Callable]:
        """
        注册模块

        可以作为函数调用:
            registry.register("module_name", module)

        也可以作为装饰器:
            @registry.register("module_name")
            class Module: ...

        未给出名称时依次使用 NAME 属性与 __name__
        """
        if module is not None:
            if module_name is None:
                module_name = getattr(module, "NAME", None) or module.__name__
            _register_generic(self, module_name, module)
            return None

        def register_fn(fn):
            name = module_name or getattr(fn, "NAME", None) or fn.__name__
            _register_generic(self, name, fn)
            return fn

        return register_fn

    def list(self) -> List[str]:
        """
        列出所有已注册的模块名
        """
        return list(self.keys())

    def get(self, name: str) -> Any:
        """
        获取已注册的模块，不存在时返回 None
        """
        return super(Registry, self).get(name, None)

    def require(self, name: str) -> Any:
        """
        获取已注册的模块，不存在时抛出 KeyError 并列出可选项
        """
        module = self.get(name)
        if module is None:
            raise KeyError(f"未注册的名称: {name}，可选: {self.list()}")
        return module
