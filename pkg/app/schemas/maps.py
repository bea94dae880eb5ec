from enum import Enum
from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveInt, field_validator, model_validator

from app.utils.validators import (
    MapFormatError,
    validate_binary_values,
    validate_unit_interval,
)


class Dimensions(BaseModel):
    model_config = ConfigDict(frozen=True)

    width: PositiveInt
    height: PositiveInt

    @property
    def shape(self) -> Tuple[int, int]:
        """numpy 陣列形狀 (height, width)"""
        return (self.height, self.width)

    def __str__(self) -> str:
        return f"{self.width}x{self.height}"


def _as_grid(value, dtype) -> np.ndarray:
    array = np.array(value, dtype=dtype, copy=True)
    if array.ndim != 2:
        raise MapFormatError(f"Pixel grid must be 2-D, got {array.ndim}-D", field="values")
    if array.shape[0] < 1 or array.shape[1] < 1:
        raise MapFormatError("Pixel grid must be at least 1x1", field="values")
    array.setflags(write=False)
    return array


class PixelGrid(BaseModel):
    """像素網格基底類別，values[y, x] 以列優先儲存"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: np.ndarray

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def height(self) -> int:
        return int(self.values.shape[0])

    @property
    def dimensions(self) -> Dimensions:
        return Dimensions(width=self.width, height=self.height)

    def __eq__(self, other) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return self.values.shape == other.values.shape and bool(
            np.array_equal(self.values, other.values)
        )

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.values.shape, self.values.tobytes()))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.width}x{self.height})"


class GrayMap(PixelGrid):
    """實數灰階圖，數值介於 [0, 1]"""

    @field_validator("values", mode="before")
    @classmethod
    def _check_values(cls, value):
        array = _as_grid(value, np.float64)
        validate_unit_interval(array)
        return array

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "GrayMap":
        return cls(values=rows)


class BinaryMap(PixelGrid):
    """二值圖，數值只有 0 或 1"""

    @field_validator("values", mode="before")
    @classmethod
    def _check_values(cls, value):
        raw = np.asarray(value)
        validate_binary_values(raw)
        return _as_grid(raw, np.uint8)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "BinaryMap":
        return cls(values=rows)

    @classmethod
    def zeros(cls, dims: Dimensions) -> "BinaryMap":
        return cls(values=np.zeros(dims.shape, dtype=np.uint8))

    @property
    def foreground_count(self) -> int:
        return int(self.values.sum())

    @property
    def is_constant(self) -> bool:
        """全 0 或全 1"""
        count = self.foreground_count
        return count == 0 or count == self.values.size

    def as_bool(self) -> np.ndarray:
        return self.values.astype(bool)


class MatrixKind(str, Enum):
    """像素矩陣類型"""
    BIAS = "bias"
    ALIGNMENT = "alignment"
    ENHANCED = "enhanced"


class PixelMatrix(PixelGrid):
    """存放偏差矩陣、對齊矩陣與增強對齊矩陣的實數網格"""

    kind: MatrixKind

    @field_validator("values", mode="before")
    @classmethod
    def _check_values(cls, value):
        array = _as_grid(value, np.float64)
        if not np.all(np.isfinite(array)):
            raise MapFormatError("Pixel matrix must be finite", field="values")
        return array

    @model_validator(mode="after")
    def _check_range(self):
        # 對齊矩陣落在 [-1, 1]，增強對齊矩陣落在 [0, 1]
        if self.kind == MatrixKind.ALIGNMENT and (self.values.min() < -1 or self.values.max() > 1):
            raise MapFormatError("Alignment matrix values must lie in [-1, 1]", field="values")
        if self.kind == MatrixKind.ENHANCED and (self.values.min() < 0 or self.values.max() > 1):
            raise MapFormatError("Enhanced alignment values must lie in [0, 1]", field="values")
        return self
