from typing import Dict

from pydantic import BaseModel, ConfigDict, Field, NonNegativeInt


class ConfusionCounts(BaseModel):
    """像素層級的混淆矩陣計數"""

    model_config = ConfigDict(frozen=True)

    tp: NonNegativeInt = 0
    fp: NonNegativeInt = 0
    tn: NonNegativeInt = 0
    fn: NonNegativeInt = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


class MeasureOutcome(BaseModel):
    """單一量測結果，degenerate 表示除以零或常數 GT 的規則被觸發"""

    model_config = ConfigDict(frozen=True)

    measure: str
    score: float = Field(ge=0.0)
    degenerate: bool = False
    params: Dict[str, str] = Field(default_factory=dict)
