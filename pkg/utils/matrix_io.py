# -*- coding: utf-8 -*-
'''
矩阵文件读写

CSV: 首行为 "m,n"，之后按行存放数据
二进制: 8 字节魔数 MIPMAT01，随后 m、n（小端 uint64），再按行存放小端 float64
'''

import io
import logging
from pathlib import Path
from typing import Union

import numpy as np

from .exceptions import DimensionMismatch, InvalidParameter

# 配置日志
logger = logging.getLogger(__name__)

MAGIC = b"MIPMAT01"
_HEADER_DTYPE = np.dtype("<u8")
_DATA_DTYPE = np.dtype("<f8")

PathLike = Union[str, Path]


def _is_binary(path: Path) -> bool:
    with open(path, "rb") as f:
        return f.read(len(MAGIC)) == MAGIC


def write_csv(path: PathLike, array: np.ndarray) -> None:
    array = np.atleast_2d(np.asarray(array, dtype=float))
    m, n = array.shape
    buffer = io.StringIO()
    buffer.write(f"{m},{n}\n")
    np.savetxt(buffer, array, delimiter=",", fmt="%.17g")
    Path(path).write_text(buffer.getvalue(), encoding="utf-8")


def read_csv(path: PathLike) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip()
        try:
            m, n = (int(v) for v in header.split(","))
        except ValueError as e:
            raise InvalidParameter(f"CSV 首行应为 m,n: {header!r}") from e
        data = np.loadtxt(f, delimiter=",", dtype=float, ndmin=2)
    if data.size != m * n:
        raise DimensionMismatch(f"CSV 声明 {m}x{n}，实际 {data.size} 个元素")
    return data.reshape(m, n)


def write_binary(path: PathLike, array: np.ndarray) -> None:
    array = np.atleast_2d(np.asarray(array, dtype=float))
    m, n = array.shape
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(np.array([m, n], dtype=_HEADER_DTYPE).tobytes())
        f.write(np.ascontiguousarray(array, dtype=_DATA_DTYPE).tobytes())


def read_binary(path: PathLike) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:len(MAGIC)] != MAGIC:
        raise InvalidParameter(f"文件缺少魔数 {MAGIC!r}: {path}")
    m, n = np.frombuffer(raw, dtype=_HEADER_DTYPE, count=2, offset=len(MAGIC))
    body = np.frombuffer(raw, dtype=_DATA_DTYPE, offset=len(MAGIC) + 2 * _HEADER_DTYPE.itemsize)
    if body.size != int(m) * int(n):
        raise DimensionMismatch(f"二进制声明 {m}x{n}，实际 {body.size} 个元素")
    return body.reshape(int(m), int(n)).astype(float)


def read_array(path: PathLike) -> np.ndarray:
    """
    按内容自动识别格式读取二维数组
    """
    path = Path(path)
    array = read_binary(path) if _is_binary(path) else read_csv(path)
    logger.debug(f"读取矩阵 {path}: {array.shape}")
    return array


def write_array(path: PathLike, array: np.ndarray) -> None:
    """
    后缀为 .bin 时写二进制，否则写 CSV
    """
    if Path(path).suffix == ".bin":
        write_binary(path, array)
    else:
        write_csv(path, array)


def read_vector(path: PathLike) -> np.ndarray:
    """
    读取向量文件（单列或单行）
    """
    array = read_array(path)
    if min(array.shape) != 1:
        raise DimensionMismatch(f"向量文件应为单行或单列: {array.shape}")
    return array.reshape(-1)


def write_vector(path: PathLike, vector: np.ndarray) -> None:
    write_array(path, np.asarray(vector, dtype=float).reshape(-1, 1))
