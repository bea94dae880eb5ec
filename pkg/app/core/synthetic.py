"""
Trivial and synthetic maps for the meta-measure harness: the centred generic
disk, Gaussian noise maps, GT perturbations and random blob ground truths.
"""

from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from app.config import settings
from app.core.maps import binarize_adaptive, shift_map
from app.schemas.maps import BinaryMap, Dimensions, GrayMap
from app.utils.rng import item_stream
from app.utils.validators import DegenerateMapError

SHIFT_DIRECTIONS: Tuple[Tuple[int, int], ...] = ((1, 0), (-1, 0), (0, 1), (0, -1))


class PerturbKind(str, Enum):
    """GT 擾動類型"""
    DILATE = "dilate"
    ERODE = "erode"
    SHIFT = "shift"
    FLIP_NOISE = "flip-noise"


def generic_circle(d: Dimensions, radius_ratio: float = settings.GENERIC_RADIUS_RATIO) -> BinaryMap:
    """
    置中的實心圓。

    圓心 (w/2, h/2)，半徑 ratio × min(w, h)；像素中心 (x + 0.5, y + 0.5)
    落在圓內或圓上即為前景。
    """
    cx = d.width / 2.0
    cy = d.height / 2.0
    radius = radius_ratio * min(d.width, d.height)

    ys = np.arange(d.height, dtype=np.float64)[:, None] + 0.5
    xs = np.arange(d.width, dtype=np.float64)[None, :] + 0.5
    inside = (xs - cx) ** 2 + (ys - cy) ** 2 <= radius ** 2
    return BinaryMap(values=inside)


def gaussian_noise_gray(
    d: Dimensions,
    rng: np.random.Generator,
    mean: float = settings.NOISE_MEAN,
    std: float = settings.NOISE_STD,
) -> GrayMap:
    """i.i.d. 常態分佈雜訊，截斷到 [0, 1]"""
    samples = rng.normal(mean, std, size=d.shape)
    return GrayMap(values=np.clip(samples, 0.0, 1.0))


def gaussian_noise_map(
    d: Dimensions,
    seed: int,
    mean: float = settings.NOISE_MEAN,
    std: float = settings.NOISE_STD,
    key: Optional[str] = None,
    factor: float = settings.NOISE_THRESHOLD_FACTOR,
) -> BinaryMap:
    """
    高斯雜訊二值圖，以雜訊本身平均值的倍數為閾值二值化。

    預設倍數 1 使前景約佔一半；倍數 2（模型輸出的自適應規則）下閾值
    幾乎貼齊 1 − ε，雜訊圖會近乎全黑。

    Args:
        d: 尺寸
        seed: 主種子
        mean: 常態分佈平均
        std: 常態分佈標準差
        key: 影像 ID，給定時由 (seed, key) 派生獨立串流
        factor: 閾值為 factor × 雜訊平均（上限 1 − ε）

    Returns:
        固定種子下可重現的二值圖
    """
    rng = item_stream(seed, "noise", key) if key is not None else item_stream(seed)
    return binarize_adaptive(gaussian_noise_gray(d, rng, mean, std), factor=factor)


def _square(radius: int) -> np.ndarray:
    return np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)


def perturb(gt: BinaryMap, kind: PerturbKind, magnitude: int, seed: int) -> BinaryMap:
    """
    擾動 GT 以產生類似 SOTA 輸出的圖。

    Args:
        gt: 二值 GT 圖
        kind: dilate / erode 以方形結構元素為半徑，shift 為位移像素數，
            flip-noise 以 magnitude/1000 的比率翻轉像素
        magnitude: 非負整數強度
        seed: 種子（決定位移方向與翻轉位置）

    Returns:
        擾動後的二值圖

    Raises:
        DegenerateMapError: 如果非常數的 GT 擾動後變成常數圖
    """
    kind = PerturbKind(kind)
    if magnitude < 0:
        raise ValueError(f"magnitude must be non-negative, got {magnitude}")
    if magnitude == 0:
        return gt

    g = gt.as_bool()
    rng = item_stream(seed, "perturb", kind.value)

    if kind == PerturbKind.DILATE:
        out = ndimage.binary_dilation(g, structure=_square(magnitude))
    elif kind == PerturbKind.ERODE:
        out = ndimage.binary_erosion(g, structure=_square(magnitude))
    elif kind == PerturbKind.SHIFT:
        dx, dy = SHIFT_DIRECTIONS[int(rng.integers(len(SHIFT_DIRECTIONS)))]
        out = shift_map(gt, dx * magnitude, dy * magnitude).as_bool()
    else:
        flips = rng.random(g.shape) < magnitude / 1000.0
        out = g ^ flips

    result = BinaryMap(values=out)
    if result.is_constant and not gt.is_constant:
        raise DegenerateMapError(
            f"{kind.value} with magnitude {magnitude} produced a constant map; use a smaller magnitude",
            field="magnitude",
        )
    return result


def random_blob_gt(d: Dimensions, rng: np.random.Generator) -> BinaryMap:
    """由 1 到 3 個隨機橢圓聯集而成的 GT"""
    short_side = min(d.width, d.height)
    min_axis = max(4.0, 0.08 * short_side)
    max_axis = max(min_axis + 1.0, 0.3 * short_side)

    ys = np.arange(d.height, dtype=np.float64)[:, None] + 0.5
    xs = np.arange(d.width, dtype=np.float64)[None, :] + 0.5
    mask = np.zeros(d.shape, dtype=bool)

    for _ in range(int(rng.integers(1, 4))):
        cx = rng.uniform(0.2, 0.8) * d.width
        cy = rng.uniform(0.2, 0.8) * d.height
        a = rng.uniform(min_axis, max_axis)
        b = rng.uniform(min_axis, max_axis)
        angle = rng.uniform(0.0, np.pi)

        cos_t = np.cos(angle)
        sin_t = np.sin(angle)
        u = (xs - cx) * cos_t + (ys - cy) * sin_t
        v = -(xs - cx) * sin_t + (ys - cy) * cos_t
        mask |= (u / a) ** 2 + (v / b) ** 2 <= 1.0

    if not mask.any() or mask.all():
        # 退回置中圓
        return generic_circle(d)
    return BinaryMap(values=mask)
