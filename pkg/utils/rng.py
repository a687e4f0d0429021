# -*- coding: utf-8 -*-
'''
随机数发生器

统一使用计数器型发生器（默认 Philox），种子由 SeedSequence([seed, *stream]) 派生，
因此第 i 次试验的随机流只依赖 (master_seed, i)，与调度顺序无关。
'''

import logging
from typing import Dict, Type

import numpy as np

# 配置日志
logger = logging.getLogger(__name__)

BIT_GENERATORS: Dict[str, Type[np.random.BitGenerator]] = {
    "philox": np.random.Philox,
}

DEFAULT_GENERATOR = "philox"


def seed_sequence(seed: int, *stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), *[int(s) for s in stream]])


def make_generator(seed: int, *stream: int, name: str = DEFAULT_GENERATOR) -> np.random.Generator:
    """
    构造随机数发生器

    参数:
        seed: 主种子
        *stream: 子流编号，例如试验序号
        name: 发生器名称，目前仅支持 philox

    返回:
        numpy Generator
    """
    bit_generator = BIT_GENERATORS.get(name)
    if bit_generator is None:
        raise KeyError(f"不支持的随机数发生器: {name}，可选: {list(BIT_GENERATORS)}")
    return np.random.Generator(bit_generator(seed_sequence(seed, *stream)))


def derived_seed(seed: int, *stream: int) -> int:
    """
    子流对应的 63 位整数种子，写入试验记录
    """
    word = seed_sequence(seed, *stream).generate_state(1, dtype=np.uint64)[0]
    return int(word >> np.uint64(1))
