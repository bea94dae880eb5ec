"""
Enhanced-alignment measure for binary foreground maps.

The score is the mean of the enhanced alignment matrix, which combines each
pixel's value with the image-level mean of both maps.
"""

import math

import numpy as np
import structlog

from app.core.maps import mean_value
from app.schemas.maps import BinaryMap, MatrixKind, PixelMatrix
from app.schemas.measures import MeasureOutcome
from app.utils.validators import validate_same_shape

logger = structlog.get_logger(__name__)

MEASURE_ID = "emeasure"


def bias_matrix(i: BinaryMap) -> PixelMatrix:
    """偏差矩陣 φ = I − μ_I"""
    return PixelMatrix(values=i.values - mean_value(i), kind=MatrixKind.BIAS)


def alignment_matrix(phi_gt: PixelMatrix, phi_fm: PixelMatrix) -> PixelMatrix:
    """
    對齊矩陣 ξ = 2ab / (a² + b²)。

    Args:
        phi_gt: GT 的偏差矩陣
        phi_fm: FM 的偏差矩陣

    Returns:
        對齊矩陣；分母為 0 的像素定義為 0

    Raises:
        DimensionMismatchError: 如果尺寸不一致
    """
    validate_same_shape(phi_gt.values, phi_fm.values, "bias matrices")
    a = phi_gt.values
    b = phi_fm.values

    numerator = 2.0 * a * b
    denominator = a * a + b * b
    xi = np.divide(numerator, denominator, out=np.zeros_like(numerator), where=denominator != 0)
    return PixelMatrix(values=np.clip(xi, -1.0, 1.0), kind=MatrixKind.ALIGNMENT)


def mapping_function(x):
    """凸函數 f(x) = (1 + x)² / 4"""
    return (1.0 + x) ** 2 / 4.0


def enhance(xi: PixelMatrix) -> PixelMatrix:
    """增強對齊矩陣 ϕ = f(ξ)"""
    return PixelMatrix(values=mapping_function(xi.values), kind=MatrixKind.ENHANCED)


def enhanced_alignment(gt: BinaryMap, fm: BinaryMap) -> PixelMatrix:
    """
    計算增強對齊矩陣，包含常數 GT 的處理規則。

    GT 全 0 時 ϕ = 1 − FM；GT 全 1 時 ϕ = FM。
    """
    validate_same_shape(gt.values, fm.values, "GT and FM")

    if gt.foreground_count == 0:
        return PixelMatrix(values=1.0 - fm.values, kind=MatrixKind.ENHANCED)
    if gt.foreground_count == gt.values.size:
        return PixelMatrix(values=fm.values.astype(np.float64), kind=MatrixKind.ENHANCED)

    xi = alignment_matrix(bias_matrix(gt), bias_matrix(fm))
    return enhance(xi)


def e_measure_outcome(gt: BinaryMap, fm: BinaryMap) -> MeasureOutcome:
    """計算 E-measure 並標記是否觸發常數 GT 規則"""
    phi = enhanced_alignment(gt, fm)
    score = math.fsum(phi.values.ravel()) / phi.values.size

    degenerate = gt.is_constant
    if degenerate:
        logger.debug("Constant GT policy applied", measure=MEASURE_ID, gt_mean=mean_value(gt))

    return MeasureOutcome(measure=MEASURE_ID, score=min(max(score, 0.0), 1.0), degenerate=degenerate)


def e_measure(gt: BinaryMap, fm: BinaryMap) -> float:
    """
    E-measure：增強對齊矩陣在 w × h 個像素上的平均。

    Args:
        gt: 二值 GT 圖
        fm: 二值前景圖

    Returns:
        介於 [0, 1] 的分數

    Raises:
        DimensionMismatchError: 如果尺寸不一致
    """
    return e_measure_outcome(gt, fm).score
