"""
Classic binary-map measures: F-beta, Jaccard / IoU and the weighted F-beta (Fbw).
"""

from typing import Callable, Optional, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field
from scipy import ndimage

from app.config import settings
from app.core.distance import edt_with_indices
from app.schemas.maps import BinaryMap
from app.schemas.measures import ConfusionCounts, MeasureOutcome
from app.utils.validators import validate_same_shape

logger = structlog.get_logger(__name__)


def confusion(gt: BinaryMap, fm: BinaryMap) -> ConfusionCounts:
    """
    計算混淆矩陣四個基本量。

    Raises:
        DimensionMismatchError: 如果尺寸不一致
    """
    validate_same_shape(gt.values, fm.values, "GT and FM")
    g = gt.as_bool()
    f = fm.as_bool()
    return ConfusionCounts(
        tp=int(np.count_nonzero(g & f)),
        fp=int(np.count_nonzero(~g & f)),
        tn=int(np.count_nonzero(~g & ~f)),
        fn=int(np.count_nonzero(g & ~f)),
    )


def _safe_ratio(numerator: float, denominator: float) -> Tuple[float, bool]:
    """0/0 定義為 0，並回傳是否發生除以零"""
    if denominator == 0:
        return 0.0, True
    return numerator / denominator, False


def precision_recall(c: ConfusionCounts) -> Tuple[float, float, bool]:
    """回傳 (precision, recall, 是否觸發除以零規則)"""
    precision, p_zero = _safe_ratio(c.tp, c.tp + c.fp)
    recall, r_zero = _safe_ratio(c.tp, c.tp + c.fn)
    return precision, recall, p_zero or r_zero


def combine_f_beta(precision: float, recall: float, beta: float) -> Tuple[float, bool]:
    """(1 + β²)·P·R / (β²·P + R)"""
    beta2 = beta * beta
    score, zero = _safe_ratio((1 + beta2) * precision * recall, beta2 * precision + recall)
    return min(max(score, 0.0), 1.0), zero


def f_beta_id(beta: float) -> str:
    return "f1" if beta == 1 else f"fbeta:{float(beta)!r}"


def f_beta_outcome(c: ConfusionCounts, beta: float) -> MeasureOutcome:
    """計算 F_β 並標記除以零規則"""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    precision, recall, pr_zero = precision_recall(c)
    score, f_zero = combine_f_beta(precision, recall, beta)
    return MeasureOutcome(
        measure=f_beta_id(beta),
        score=score,
        degenerate=pr_zero or f_zero,
        params={"beta": repr(float(beta))},
    )


def f_beta(c: ConfusionCounts, beta: float) -> float:
    """
    F_β 量測，β = 1 即 F1。

    Args:
        c: 混淆矩陣計數
        beta: 召回率與精確率的權衡參數

    Returns:
        介於 [0, 1] 的分數；任何 0/0 皆定義為 0
    """
    return f_beta_outcome(c, beta).score


def iou_outcome(c: ConfusionCounts) -> MeasureOutcome:
    """計算 IoU；兩張圖皆為空時定義為 1"""
    union = c.tp + c.fn + c.fp
    if union == 0:
        return MeasureOutcome(measure="iou", score=1.0, degenerate=True)
    return MeasureOutcome(measure="iou", score=c.tp / union)


def iou_ji(c: ConfusionCounts) -> float:
    """Jaccard Index / IoU = TP / (TP + FN + FP)"""
    return iou_outcome(c).score


class FbwWeighting(BaseModel):
    """Fbw 誤差權重配置"""

    model_config = ConfigDict(frozen=True)

    sigma: float = Field(default=settings.FBW_SIGMA, gt=0)
    kernel_size: int = Field(default=settings.FBW_KERNEL_SIZE, ge=1)
    alpha: float = Field(default=settings.FBW_ALPHA, lt=0)
    enabled: bool = True

    @classmethod
    def from_settings(cls, current=None) -> "FbwWeighting":
        return cls(**(current or settings).get_fbw_config())


def gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    """正規化的 size × size 高斯相依核"""
    grid = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    xx, yy = np.meshgrid(grid, grid)
    kernel = np.exp(-(xx ** 2 + yy ** 2) / (2.0 * sigma ** 2))
    return kernel / kernel.sum()


def weighted_error_field(gt: BinaryMap, fm: BinaryMap, weighting: FbwWeighting) -> np.ndarray:
    """
    計算加權誤差場 E^ω。

    背景像素先取其最近 GT 前景像素的誤差，再以高斯核平滑；前景內的誤差
    取 min(E, 平滑 E)。背景的誤差乘上 B = 2 − exp(α·d)，d 為到最近 GT
    前景像素的歐氏距離。

    Args:
        gt: 二值 GT 圖（至少一個前景像素）
        fm: 二值前景圖
        weighting: 權重配置

    Returns:
        與輸入同尺寸的加權誤差陣列
    """
    g = gt.as_bool()
    error = np.abs(fm.values.astype(np.float64) - gt.values.astype(np.float64))
    if not weighting.enabled:
        return error

    distance, nearest_row, nearest_col = edt_with_indices(g)

    spread = error.copy()
    spread[~g] = error[nearest_row[~g], nearest_col[~g]]

    kernel = gaussian_kernel(weighting.kernel_size, weighting.sigma)
    smoothed = ndimage.correlate(spread, kernel, mode="nearest")

    min_error = error.copy()
    inside = g & (smoothed < error)
    min_error[inside] = smoothed[inside]

    importance = np.ones_like(error)
    importance[~g] = 2.0 - np.exp(weighting.alpha * distance[~g])

    return min_error * importance


ErrorField = Callable[[BinaryMap, BinaryMap, FbwWeighting], np.ndarray]


def fbw_outcome(
    gt: BinaryMap,
    fm: BinaryMap,
    beta: float = settings.FBW_BETA,
    weighting: Optional[FbwWeighting] = None,
    error_field: ErrorField = weighted_error_field,
) -> MeasureOutcome:
    """
    加權 F_β（Fbw）。

    Args:
        gt: 二值 GT 圖
        fm: 二值前景圖
        beta: 權衡參數
        weighting: 權重配置，None 表示使用設定檔預設值
        error_field: 可替換的加權誤差函數，合併公式固定

    Returns:
        量測結果；GT 全 0 時分數為 0 並標記 degenerate

    Raises:
        DimensionMismatchError: 如果尺寸不一致
    """
    validate_same_shape(gt.values, fm.values, "GT and FM")
    weighting = weighting or FbwWeighting.from_settings()
    params = {"beta": f"{beta:g}", "weighted": str(weighting.enabled).lower()}

    if gt.foreground_count == 0:
        logger.debug("Empty GT policy applied", measure="fbw")
        return MeasureOutcome(measure="fbw", score=0.0, degenerate=True, params=params)

    g = gt.as_bool()
    ew = error_field(gt, fm, weighting)

    fn_w = float(ew[g].sum())
    tp_w = max(float(g.sum()) - fn_w, 0.0)
    fp_w = float(ew[~g].sum())

    precision, p_zero = _safe_ratio(tp_w, tp_w + fp_w)
    recall, r_zero = _safe_ratio(tp_w, tp_w + fn_w)
    score, f_zero = combine_f_beta(precision, recall, beta)

    return MeasureOutcome(
        measure="fbw",
        score=score,
        degenerate=p_zero or r_zero or f_zero,
        params=params,
    )


def fbw(
    gt: BinaryMap,
    fm: BinaryMap,
    beta: float = settings.FBW_BETA,
    weighting: Optional[FbwWeighting] = None,
) -> float:
    """加權 F_β 分數"""
    return fbw_outcome(gt, fm, beta, weighting).score
