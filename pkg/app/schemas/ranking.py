from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class RankedItem(BaseModel):
    model_config = ConfigDict(frozen=True)

    item_id: str
    score: float


class RankingList(BaseModel):
    """帶分數的項目排名清單，分數越高排名越前"""

    model_config = ConfigDict(frozen=True)

    items: List[RankedItem]

    @field_validator("items")
    @classmethod
    def _unique_ids(cls, items):
        ids = [item.item_id for item in items]
        if len(ids) != len(set(ids)):
            raise ValueError("item ids must be unique within a ranking list")
        return items

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[str, float]]) -> "RankingList":
        return cls(items=[RankedItem(item_id=i, score=s) for i, s in pairs])

    @classmethod
    def from_scores(cls, scores: Dict[str, float]) -> "RankingList":
        return cls.from_pairs(list(scores.items()))

    @classmethod
    def from_ranks(cls, ranks: Dict[str, int]) -> "RankingList":
        """由名次建立（名次 1 最好）"""
        return cls.from_pairs([(i, -float(r)) for i, r in ranks.items()])

    @property
    def ids(self) -> List[str]:
        return [item.item_id for item in self.items]

    def score_of(self, item_id: str) -> float:
        for item in self.items:
            if item.item_id == item_id:
                return item.score
        raise KeyError(item_id)

    def __len__(self) -> int:
        return len(self.items)


class RetrievalDump(BaseModel):
    """單一查詢的檢索結果（最多 100 筆，依相似度排序）"""

    model_config = ConfigDict(frozen=True)

    query_id: str
    result_ids: List[str] = Field(max_length=100)
    scores: List[float] = Field(max_length=100)

    @model_validator(mode="after")
    def _aligned(self):
        if len(self.result_ids) != len(self.scores):
            raise ValueError("result ids and scores must align one-to-one")
        if len(self.result_ids) != len(set(self.result_ids)):
            raise ValueError("result ids must be unique")
        return self

    def find(self, item_id: str) -> Optional[Tuple[int, float]]:
        """回傳 (1 起算的名次, 分數)，找不到時回傳 None"""
        try:
            index = self.result_ids.index(item_id)
        except ValueError:
            return None
        return index + 1, self.scores[index]
