# -*- coding: utf-8 -*-
'''
异常定义

所有业务异常均继承自 MipRecoverError，CLI 统一捕获后以退出码 2 结束。
'''

from typing import Any, Optional


class MipRecoverError(Exception):
    """项目异常基类"""


class InvalidParameter(MipRecoverError, ValueError):
    """参数取值非法"""


class DimensionMismatch(MipRecoverError, ValueError):
    """向量/矩阵维度不一致"""


class InvalidDims(MipRecoverError, ValueError):
    """矩阵维度不满足前置条件"""


class ZeroColumn(MipRecoverError, ValueError):
    """存在零列，无法归一化"""

    def __init__(self, index: int):
        super().__init__(f"第 {index} 列范数过小，无法归一化")
        self.index = index


class NotNormalized(MipRecoverError):
    """矩阵列未归一化，相干性无定义"""


class NotPowerOfTwo(MipRecoverError, ValueError):
    """Hadamard 构造要求 2 的幂"""


class EmptySupport(MipRecoverError, ValueError):
    """支撑集为空"""


class SingularGram(MipRecoverError):
    """Gram 子矩阵奇异"""


class SupportViolation(MipRecoverError):
    """信号支撑不在给定指标集内"""


class NotInPolytope(MipRecoverError):
    """向量不属于多面体 T(kappa, s)"""


class ZeroImage(MipRecoverError):
    """Ax 为零，商性质比值无定义"""


class NotApplicable(MipRecoverError):
    """定理的适用条件不成立"""

    def __init__(self, condition_text: str):
        super().__init__(condition_text)
        self.condition_text = condition_text


class NotConverged(MipRecoverError):
    """求解器未在迭代上限内通过最优性证书"""

    def __init__(self, message: str, outcome: Optional[Any] = None):
        super().__init__(message)
        self.outcome = outcome


class InfeasibleError(MipRecoverError):
    """约束不可行（b 不在 A 的值域内或 η 过小）"""

    def __init__(self, message: str, outcome: Optional[Any] = None):
        super().__init__(message)
        self.outcome = outcome


class ConfigError(MipRecoverError):
    """实验配置错误，消息中带有行号或字段路径"""
