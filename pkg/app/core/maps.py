"""
Pure pixel-map transforms shared by every measure and by the meta-measure harness.
"""

from typing import Union

import numpy as np

from app.config import settings
from app.schemas.maps import BinaryMap, Dimensions, GrayMap


def binarize_fixed(g: GrayMap, t: float) -> BinaryMap:
    """固定閾值二值化，像素 >= t 為前景"""
    return BinaryMap(values=g.values >= t)


def adaptive_threshold(
    g: GrayMap,
    factor: float = settings.ADAPTIVE_FACTOR,
    epsilon: float = settings.ADAPTIVE_EPSILON,
) -> float:
    """影像相依閾值 min(2 × mean, 1 − ε)"""
    return min(factor * mean_value(g), 1.0 - epsilon)


def binarize_adaptive(
    g: GrayMap,
    factor: float = settings.ADAPTIVE_FACTOR,
    epsilon: float = settings.ADAPTIVE_EPSILON,
) -> BinaryMap:
    """
    影像相依的自適應二值化。

    Args:
        g: 灰階圖
        factor: 平均值倍數
        epsilon: 閾值上限 1 − ε 的 ε

    Returns:
        二值圖；全 0 的輸入直接回傳全 0
    """
    # 平均為 0 代表沒有任何前景證據
    if not np.any(g.values):
        return BinaryMap.zeros(g.dimensions)
    return binarize_fixed(g, adaptive_threshold(g, factor, epsilon))


def complement(b: BinaryMap) -> BinaryMap:
    """逐像素反轉 1 − v"""
    return BinaryMap(values=1 - b.values)


def resize_nn(b: BinaryMap, d: Dimensions) -> BinaryMap:
    """
    最近鄰縮放。

    目標像素 (x, y) 取來源像素 (floor(x·w/W), floor(y·h/H))。
    """
    if b.dimensions == d:
        return b
    rows = (np.arange(d.height) * b.height) // d.height
    cols = (np.arange(d.width) * b.width) // d.width
    return BinaryMap(values=b.values[np.ix_(rows, cols)])


def mean_value(m: Union[GrayMap, BinaryMap]) -> float:
    """所有像素的算術平均"""
    return float(np.mean(m.values, dtype=np.float64))


def shift_map(b: BinaryMap, dx: int, dy: int) -> BinaryMap:
    """平移 (dx, dy) 像素，移出的部分捨棄，移入的部分補 0"""
    out = np.zeros_like(b.values)
    h, w = b.values.shape
    if abs(dx) >= w or abs(dy) >= h:
        return BinaryMap(values=out)

    src_y = slice(max(0, -dy), h - max(0, dy))
    dst_y = slice(max(0, dy), h - max(0, -dy))
    src_x = slice(max(0, -dx), w - max(0, dx))
    dst_x = slice(max(0, dx), w - max(0, -dx))
    out[dst_y, dst_x] = b.values[src_y, src_x]
    return BinaryMap(values=out)
