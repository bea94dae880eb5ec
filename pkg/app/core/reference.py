"""
Naive per-pixel reference implementations used as oracles by the selftest
command and the test-suite. Loop-based; never used for scoring.
"""

import math
from typing import List, Tuple

from app.schemas.maps import BinaryMap


def _rows(m: BinaryMap) -> List[List[int]]:
    return [[int(v) for v in row] for row in m.values.tolist()]


def naive_e_measure(gt: BinaryMap, fm: BinaryMap) -> float:
    """逐像素雙迴圈計算 E-measure"""
    g = _rows(gt)
    f = _rows(fm)
    h = len(g)
    w = len(g[0])
    n = w * h

    mu_g = sum(sum(row) for row in g) / n
    mu_f = sum(sum(row) for row in f) / n

    total = 0.0
    for y in range(h):
        for x in range(w):
            if mu_g == 0.0:
                phi = 1.0 - f[y][x]
            elif mu_g == 1.0:
                phi = float(f[y][x])
            else:
                a = g[y][x] - mu_g
                b = f[y][x] - mu_f
                denominator = a * a + b * b
                xi = 2.0 * a * b / denominator if denominator != 0 else 0.0
                phi = (1.0 + xi) ** 2 / 4.0
            total += phi
    return total / n


def naive_nearest(foreground: List[Tuple[int, int]], y: int, x: int) -> Tuple[float, int, int]:
    """暴力搜尋最近前景像素，距離相同時取最小欄再取最小列"""
    best = None
    for yy, xx in foreground:
        key = ((yy - y) ** 2 + (xx - x) ** 2, xx, yy)
        if best is None or key < best:
            best = key
    d2, bx, by = best
    return math.sqrt(d2), by, bx


def naive_fbw(
    gt: BinaryMap,
    fm: BinaryMap,
    beta: float = 1.0,
    sigma: float = 5.0,
    kernel_size: int = 7,
    alpha: float = math.log(0.5) / 5,
) -> float:
    """逐像素計算 Fbw（邊界以最近像素延伸）"""
    g = _rows(gt)
    f = _rows(fm)
    h = len(g)
    w = len(g[0])
    if not any(any(row) for row in g):
        return 0.0

    error = [[abs(f[y][x] - g[y][x]) for x in range(w)] for y in range(h)]
    foreground = [(y, x) for y in range(h) for x in range(w) if g[y][x]]
    nearest = [[naive_nearest(foreground, y, x) for x in range(w)] for y in range(h)]

    spread = [
        [error[y][x] if g[y][x] else error[nearest[y][x][1]][nearest[y][x][2]] for x in range(w)]
        for y in range(h)
    ]

    half = (kernel_size - 1) / 2.0
    weights = [
        [math.exp(-((i - half) ** 2 + (j - half) ** 2) / (2 * sigma ** 2)) for j in range(kernel_size)]
        for i in range(kernel_size)
    ]
    norm = sum(sum(row) for row in weights)
    offset = kernel_size // 2

    tp_w = 0.0
    fp_w = 0.0
    fn_w = 0.0
    for y in range(h):
        for x in range(w):
            smoothed = 0.0
            for i in range(kernel_size):
                for j in range(kernel_size):
                    yy = min(max(y + i - offset, 0), h - 1)
                    xx = min(max(x + j - offset, 0), w - 1)
                    smoothed += weights[i][j] / norm * spread[yy][xx]
            e = error[y][x]
            if g[y][x]:
                ew = min(e, smoothed)
                fn_w += ew
                tp_w += 1.0 - ew
            else:
                ew = e * (2.0 - math.exp(alpha * nearest[y][x][0]))
                fp_w += ew

    tp_w = max(tp_w, 0.0)
    precision = tp_w / (tp_w + fp_w) if tp_w + fp_w > 0 else 0.0
    recall = tp_w / (tp_w + fn_w) if tp_w + fn_w > 0 else 0.0
    b2 = beta * beta
    denominator = b2 * precision + recall
    return (1 + b2) * precision * recall / denominator if denominator > 0 else 0.0
