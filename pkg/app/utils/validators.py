import re
from typing import Optional, Tuple

import numpy as np


class ValidationError(ValueError):
    """驗證錯誤異常"""

    def __init__(self, message: str, field: str = None):
        self.message = message
        self.field = field
        super().__init__(self.message)


class DimensionMismatchError(ValidationError):
    """兩張圖尺寸不一致"""


class MapFormatError(ValidationError):
    """圖檔格式或數值不合法"""


class DegenerateMapError(ValidationError):
    """產生的圖為常數圖（全 0 或全 1）"""


class ManifestError(ValidationError):
    """資料集清單（manifest）內容錯誤"""


class MeasureIdError(ValidationError):
    """未知或格式錯誤的量測 ID"""


class RankingError(ValidationError):
    """排名資料不合法"""


_FIXED_THRESHOLD = re.compile(r"^fixed:(?P<t>[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)$")
_SIZE = re.compile(r"^(?P<w>[1-9][0-9]*)[xX](?P<h>[1-9][0-9]*)$")


def validate_same_shape(a: np.ndarray, b: np.ndarray, what: str = "maps") -> None:
    """驗證兩個陣列尺寸相同"""
    if a.shape != b.shape:
        raise DimensionMismatchError(
            f"Dimension mismatch between {what}: "
            f"{a.shape[1]}x{a.shape[0]} vs {b.shape[1]}x{b.shape[0]}",
            field="dimensions",
        )


def validate_unit_interval(values: np.ndarray, field: str = "values") -> None:
    """驗證所有數值落在 [0, 1]"""
    if values.size and (not np.all(np.isfinite(values)) or values.min() < 0 or values.max() > 1):
        raise MapFormatError(f"{field} must lie in [0, 1]", field=field)


def validate_binary_values(values: np.ndarray, field: str = "values") -> None:
    """驗證所有數值只有 0 或 1"""
    if values.size and not np.all((values == 0) | (values == 1)):
        raise MapFormatError(f"{field} must contain only 0 and 1", field=field)


def parse_threshold_mode(text: str) -> Tuple[str, Optional[float]]:
    """
    解析二值化模式字串。

    Args:
        text: "asis"、"adaptive" 或 "fixed:<t>"

    Returns:
        (模式名稱, 固定閾值或 None)

    Raises:
        ValidationError: 如果格式錯誤或閾值不在 [0, 1]
    """
    text = text.strip().lower()
    if text in ("asis", "binary-as-is"):
        return "asis", None
    if text == "adaptive":
        return "adaptive", None

    match = _FIXED_THRESHOLD.match(text)
    if not match:
        raise ValidationError(f"Unknown threshold mode: {text}", field="threshold")

    t = float(match.group("t"))
    if not 0 <= t <= 1:
        raise ValidationError(f"Fixed threshold must be in [0, 1], got {t}", field="threshold")
    return "fixed", t


def parse_size(text: str) -> Tuple[int, int]:
    """解析 WxH 尺寸字串"""
    match = _SIZE.match(text.strip())
    if not match:
        raise ValidationError(f"Size must look like WxH, got {text!r}", field="size")
    return int(match.group("w")), int(match.group("h"))


def parse_measure_list(text: str) -> list:
    """解析以逗號分隔的量測 ID 清單"""
    ids = [item.strip() for item in text.split(",") if item.strip()]
    if not ids:
        raise MeasureIdError("At least one measure id is required", field="measures")
    return ids


def validate_permutation(ranks: list, size: int) -> bool:
    """驗證排名是否為 1..size 的排列"""
    return sorted(ranks) == list(range(1, size + 1))


def validate_keep_fraction(keep_fraction: float) -> None:
    """驗證保留比例"""
    if not 0 < keep_fraction <= 1:
        raise ValidationError(
            f"keep_fraction must be in (0, 1], got {keep_fraction}", field="keep_fraction"
        )
