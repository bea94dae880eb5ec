"""
Rank statistics: tie-aware ranks, Spearman's rho, theta = 1 - rho and the
retrieval-based application score.
"""

from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import stats

from app.schemas.ranking import RankingList, RetrievalDump
from app.utils.validators import RankingError


def ranks_with_ties(scores: Sequence[float]) -> List[float]:
    """
    將分數轉為名次，分數最高為 1，同分取平均名次。

    Args:
        scores: 至少一個分數

    Returns:
        與輸入對齊的名次
    """
    if len(scores) < 1:
        raise RankingError("At least one score is required", field="scores")
    return [float(r) for r in stats.rankdata(-np.asarray(scores, dtype=np.float64), method="average")]


def _aligned_ranks(a: RankingList, b: RankingList):
    if set(a.ids) != set(b.ids) or len(a) != len(b):
        raise RankingError("Ranking lists must contain the same item ids", field="items")
    if len(a) < 2:
        raise RankingError("At least two items are required for correlation", field="items")

    order = a.ids
    ranks_a = ranks_with_ties([a.score_of(i) for i in order])
    ranks_b = ranks_with_ties([b.score_of(i) for i in order])
    return np.asarray(ranks_a), np.asarray(ranks_b)


def spearman_rho(a: RankingList, b: RankingList) -> float:
    """
    Spearman 等級相關：兩組平均名次的 Pearson 相關。

    Raises:
        RankingError: 如果項目集合不一致或少於兩個
    """
    ranks_a, ranks_b = _aligned_ranks(a, b)

    da = ranks_a - ranks_a.mean()
    db = ranks_b - ranks_b.mean()
    denominator = float(np.sqrt(np.sum(da * da) * np.sum(db * db)))
    # 任一名次向量為常數時沒有排名資訊
    if denominator == 0:
        return 0.0
    rho = float(np.sum(da * db)) / denominator
    return min(max(rho, -1.0), 1.0)


def theta(a: RankingList, b: RankingList) -> float:
    """θ = 1 − ρ，介於 [0, 2]"""
    return 1.0 - spearman_rho(a, b)


def retrieval_score(
    found_rank_k: Optional[int],
    found_score: Optional[float],
    intersection_size: int,
) -> float:
    """
    檢索應用分數。

    找到 GT 合成圖時 S = 分數 + 1/k + |I|/100，否則 S = |I|/100。

    Args:
        found_rank_k: GT 合成圖在 FM 檢索清單中的名次（1 起算）
        found_score: 對應的相似度分數
        intersection_size: GT 與 FM 檢索清單交集大小
    """
    if not 0 <= intersection_size <= 100:
        raise RankingError(
            f"intersection_size must be in [0, 100], got {intersection_size}",
            field="intersection_size",
        )
    if found_rank_k is None:
        return intersection_size / 100
    if found_rank_k < 1:
        raise RankingError(f"rank k must be positive, got {found_rank_k}", field="found_rank_k")
    if found_score is None:
        raise RankingError("found_score is required when found_rank_k is given", field="found_score")
    return found_score + 1.0 / found_rank_k + intersection_size / 100


def application_score(target_id: str, gt_dump: RetrievalDump, fm_dump: RetrievalDump) -> float:
    """以 GT 與 FM 的檢索結果計算單一 FM 的應用分數"""
    intersection = len(set(gt_dump.result_ids) & set(fm_dump.result_ids))
    found = fm_dump.find(target_id)
    if found is None:
        return retrieval_score(None, None, intersection)
    k, score = found
    return retrieval_score(k, score, intersection)


def application_ranking(
    target_id: str,
    gt_dump: RetrievalDump,
    fm_dumps: Dict[str, RetrievalDump],
) -> RankingList:
    """將各模型的應用分數組成排名清單"""
    return RankingList.from_scores(
        {name: application_score(target_id, gt_dump, dump) for name, dump in fm_dumps.items()}
    )
