"""
Exact two-pass Euclidean distance transform with a nearest-pixel feature map.

The first pass finds the nearest foreground row inside every column; the second
takes the lower envelope of the column parabolas along each row. Ties between
equally near foreground pixels resolve to the smallest column, then to the
smallest row, so results do not depend on the scan order.
"""

from fractions import Fraction
from typing import List, Tuple

import numpy as np


def _column_pass(mask: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """第一階段：每一欄內最近前景像素的垂直距離與列索引"""
    h, w = mask.shape
    rows = np.arange(h)[:, None].repeat(w, axis=1)

    above = np.where(mask, rows, -1)
    above = np.maximum.accumulate(above, axis=0)

    below = np.where(mask, rows, h + h)
    below = np.minimum.accumulate(below[::-1], axis=0)[::-1]

    d_up = np.where(above >= 0, rows - above, np.inf)
    d_down = np.where(below < h, below - rows, np.inf)

    # 上下等距時取較小的列
    use_up = d_up <= d_down
    vertical = np.where(use_up, d_up, d_down)
    nearest_row = np.where(use_up, above, below)
    return vertical, nearest_row


def _lower_envelope(f: List[int], columns: List[int], width: int) -> Tuple[List[int], List[int]]:
    """
    第二階段：一列上所有欄拋物線 (x - q)^2 + f(q) 的下包絡。

    Args:
        f: 各候選欄的垂直距離平方
        columns: 候選欄索引（遞增，至少一個）
        width: 列寬

    Returns:
        (每個 x 的最小距離平方, 對應的欄索引)
    """
    v = [0]
    z: List[object] = [None, None]  # None 代表 -inf / +inf

    for i in range(1, len(columns)):
        q, fq = columns[i], f[i]
        while True:
            p, fp = columns[v[-1]], f[v[-1]]
            s = Fraction((fq + q * q) - (fp + p * p), 2 * (q - p))
            # 交點不在前一段之後時，前一條拋物線不再出現在包絡上
            if len(v) > 1 and s <= z[len(v) - 1]:
                v.pop()
                z.pop()
                continue
            break
        v.append(i)
        z[len(v) - 1] = s
        z.append(None)

    distance_sq = [0] * width
    nearest = [0] * width
    k = 0
    for x in range(width):
        # 剛好落在交點時留在較小的欄
        while z[k + 1] is not None and z[k + 1] < x:
            k += 1
        q = columns[v[k]]
        distance_sq[x] = (x - q) * (x - q) + f[v[k]]
        nearest[x] = q
    return distance_sq, nearest


def edt_with_indices(mask: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    計算每個像素到最近前景像素的歐氏距離。

    Args:
        mask: 布林陣列，True 為前景（至少一個）

    Returns:
        (距離, 最近前景像素的列索引, 最近前景像素的欄索引)

    Raises:
        ValueError: 如果沒有任何前景像素
    """
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise ValueError("Distance transform needs at least one foreground pixel")

    h, w = mask.shape
    vertical, nearest_row = _column_pass(mask)

    # 有前景的欄在每一列都是有限距離，其餘欄永遠不會被選到
    columns = [int(c) for c in np.flatnonzero(mask.any(axis=0))]

    distance_sq = np.empty((h, w), dtype=np.int64)
    nearest_col = np.empty((h, w), dtype=np.intp)
    for y in range(h):
        f = [int(vertical[y, c]) ** 2 for c in columns]
        distance_sq[y], nearest_col[y] = _lower_envelope(f, columns, w)

    rows_out = nearest_row[np.arange(h)[:, None], nearest_col]
    return np.sqrt(distance_sq.astype(np.float64)), rows_out.astype(np.intp), nearest_col
