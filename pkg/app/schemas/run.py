from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, field_validator

from app.config import settings
from app.utils.validators import parse_threshold_mode


class ThresholdMode(str, Enum):
    """模型輸出圖的二值化模式"""
    ASIS = "asis"
    FIXED = "fixed"
    ADAPTIVE = "adaptive"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    """批次評估的執行設定"""

    model_config = ConfigDict(frozen=True)

    manifest: Path
    measures: List[str] = Field(min_length=1)
    threshold: str = "asis"
    seed: int = settings.DEFAULT_SEED
    jobs: PositiveInt = settings.DEFAULT_JOBS
    output_format: OutputFormat = OutputFormat.CSV
    out: Optional[Path] = None

    @field_validator("threshold")
    @classmethod
    def _check_threshold(cls, value: str) -> str:
        mode, t = parse_threshold_mode(value)
        return f"fixed:{t!r}" if mode == "fixed" else mode

    @property
    def threshold_mode(self) -> Tuple[ThresholdMode, Optional[float]]:
        mode, t = parse_threshold_mode(self.threshold)
        return ThresholdMode(mode), t

    def echo(self) -> Dict[str, object]:
        """報表中回顯的設定內容"""
        return {
            "manifest": str(self.manifest),
            "measures": list(self.measures),
            "threshold": self.threshold,
            "seed": self.seed,
            "jobs": self.jobs,
            "format": self.output_format.value,
        }


class ScoreRecord(BaseModel):
    """單一 (影像, 模型, 量測) 的分數紀錄"""

    model_config = ConfigDict(frozen=True)

    image_id: str
    measure: str
    score: float
    degenerate: bool = False
    params: Dict[str, str] = Field(default_factory=dict)

    @property
    def sort_key(self) -> Tuple[str, str, str]:
        return (self.image_id, self.measure, self.params.get("model", ""))

    def params_text(self) -> str:
        """以 key=value;key=value 排序後輸出"""
        return ";".join(f"{k}={v}" for k, v in sorted(self.params.items()))


class PairFailure(BaseModel):
    """被略過的 (影像, 模型) 組合"""

    model_config = ConfigDict(frozen=True)

    image_id: str
    model: str
    reason: str
