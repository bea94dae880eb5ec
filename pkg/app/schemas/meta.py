from enum import Enum
from pathlib import Path
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt, field_validator, model_validator

from app.schemas.maps import BinaryMap
from app.utils.validators import validate_permutation


class MetaMeasure(str, Enum):
    """Meta-measure 類型"""
    MM1 = "mm1"  # 應用排名
    MM2 = "mm2"  # SOTA vs. generic
    MM3 = "mm3"  # SOTA vs. noise
    MM4 = "mm4"  # 人工排名
    MM5 = "mm5"  # GT switch

    @property
    def is_theta(self) -> bool:
        return self in (MetaMeasure.MM1, MetaMeasure.MM4)


class TrivialMapSource(str, Enum):
    """無內容的對照圖來源"""
    GENERIC = "generic"
    NOISE = "noise"


class CandidateSet(BaseModel):
    """單張影像的 GT 與各模型輸出"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    image_id: str
    gt: BinaryMap
    models: Dict[str, BinaryMap]

    @model_validator(mode="after")
    def _check_models(self):
        if not self.models:
            raise ValueError(f"image {self.image_id}: at least one model map is required")
        for name, fm in self.models.items():
            if fm.values.shape != self.gt.values.shape:
                raise ValueError(
                    f"image {self.image_id}: model {name} is {fm.dimensions}, GT is {self.gt.dimensions}"
                )
        return self


class HumanRankedTriple(BaseModel):
    """FMDatabase 格式：一張 GT、三張候選圖與人工名次（1 最好）"""

    model_config = ConfigDict(frozen=True)

    image_id: str
    gt_path: Path
    map_paths: List[Path] = Field(min_length=3, max_length=3)
    human_ranks: List[int] = Field(min_length=3, max_length=3)

    @field_validator("human_ranks")
    @classmethod
    def _check_permutation(cls, ranks):
        if not validate_permutation(ranks, 3):
            raise ValueError(f"human ranks must be a permutation of 1..3, got {ranks}")
        return ranks


class MetaResult(BaseModel):
    """Meta-measure 結果：比率介於 [0, 1]，θ 介於 [0, 2]"""

    model_config = ConfigDict(frozen=True)

    meta_id: MetaMeasure
    measure_id: str
    value: float
    population: NonNegativeInt
    seed: int

    @model_validator(mode="after")
    def _check_range(self):
        upper = 2.0 if self.meta_id.is_theta else 1.0
        if not 0.0 <= self.value <= upper:
            raise ValueError(f"{self.meta_id.value} value must lie in [0, {upper:g}], got {self.value}")
        return self
