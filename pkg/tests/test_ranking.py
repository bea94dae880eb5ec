"""Tests for tie-aware ranks, theta and the retrieval score."""

import pytest

from app.core.ranking import (
    application_ranking,
    application_score,
    ranks_with_ties,
    retrieval_score,
    spearman_rho,
    theta,
)
from app.schemas.ranking import RankingList, RetrievalDump
from app.utils.validators import RankingError


def ranking(*ranks):
    return RankingList.from_ranks({f"item{i}": r for i, r in enumerate(ranks)})


class TestRanks:
    def test_descending(self):
        assert ranks_with_ties([3.0, 2.0, 1.0]) == [1, 2, 3]

    def test_two_way_tie(self):
        assert ranks_with_ties([1.0, 1.0]) == [1.5, 1.5]

    def test_mixed_tie(self):
        assert ranks_with_ties([5, 5, 2, 9]) == [2.5, 2.5, 4, 1]

    def test_empty(self):
        with pytest.raises(RankingError):
            ranks_with_ties([])


class TestTheta:
    def test_identical(self):
        assert spearman_rho(ranking(1, 2, 3), ranking(1, 2, 3)) == 1.0
        assert theta(ranking(1, 2, 3), ranking(1, 2, 3)) == 0.0

    def test_reversed(self):
        assert spearman_rho(ranking(1, 2, 3), ranking(3, 2, 1)) == -1.0
        assert theta(ranking(1, 2, 3), ranking(3, 2, 1)) == 2.0

    def test_one_swap(self):
        assert spearman_rho(ranking(1, 2, 3), ranking(1, 3, 2)) == pytest.approx(0.5)
        assert theta(ranking(1, 2, 3), ranking(1, 3, 2)) == pytest.approx(0.5)

    def test_constant_scores_give_one(self):
        flat = RankingList.from_scores({"a": 0.5, "b": 0.5, "c": 0.5})
        assert theta(flat, RankingList.from_ranks({"a": 1, "b": 2, "c": 3})) == 1.0

    def test_monotone_transform_invariance(self):
        a = RankingList.from_scores({"a": 0.1, "b": 0.7, "c": 0.4, "d": 0.9})
        b = RankingList.from_scores({"a": 0.3, "b": 0.2, "c": 0.8, "d": 0.6})
        cubed = RankingList.from_scores({i: a.score_of(i) ** 3 for i in a.ids})
        assert theta(a, b) == pytest.approx(theta(cubed, b), abs=1e-12)

    def test_theta_within_range(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 12))
            a = RankingList.from_scores({str(i): float(rng.integers(0, 4)) for i in range(n)})
            b = RankingList.from_scores({str(i): float(rng.random()) for i in range(n)})
            assert 0.0 <= theta(a, b) <= 2.0

    def test_mismatched_items(self):
        a = RankingList.from_scores({"a": 1.0, "b": 2.0})
        b = RankingList.from_scores({"a": 1.0, "c": 2.0})
        with pytest.raises(RankingError):
            theta(a, b)

    def test_too_short(self):
        a = RankingList.from_scores({"a": 1.0})
        with pytest.raises(RankingError):
            theta(a, a)

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            RankingList.from_pairs([("a", 1.0), ("a", 2.0)])


class TestRetrievalScore:
    def test_found_first(self):
        assert retrieval_score(1, 0.9, 100) == pytest.approx(2.9)

    def test_not_found(self):
        assert retrieval_score(None, None, 50) == 0.5
        assert retrieval_score(None, None, 0) == 0.0

    def test_monotone(self):
        assert retrieval_score(1, 0.5, 10) >= retrieval_score(2, 0.5, 10) >= retrieval_score(10, 0.5, 10)
        assert retrieval_score(3, 0.5, 20) >= retrieval_score(3, 0.5, 10)

    def test_rank_without_score(self):
        with pytest.raises(RankingError):
            retrieval_score(1, None, 10)

    def test_intersection_out_of_range(self):
        with pytest.raises(RankingError):
            retrieval_score(None, None, 101)


class TestApplicationScore:
    def test_found_in_fm_results(self):
        gt_dump = RetrievalDump(query_id="q_gt", result_ids=["img1", "a", "b"], scores=[1.0, 0.8, 0.7])
        fm_dump = RetrievalDump(query_id="q_fm", result_ids=["a", "img1", "c"], scores=[0.9, 0.6, 0.5])
        # |I| = |{img1, a}| = 2, found at rank 2 with score 0.6
        assert application_score("img1", gt_dump, fm_dump) == pytest.approx(0.6 + 0.5 + 0.02)

    def test_found_outside_intersection_still_counts(self):
        gt_dump = RetrievalDump(query_id="q_gt", result_ids=["x"], scores=[1.0])
        fm_dump = RetrievalDump(query_id="q_fm", result_ids=["img1"], scores=[0.4])
        assert application_score("img1", gt_dump, fm_dump) == pytest.approx(0.4 + 1.0)

    def test_application_ranking_orders_models(self):
        gt_dump = RetrievalDump(query_id="g", result_ids=["img1", "a"], scores=[1.0, 0.9])
        good = RetrievalDump(query_id="m1", result_ids=["img1", "a"], scores=[0.9, 0.8])
        poor = RetrievalDump(query_id="m2", result_ids=["z"], scores=[0.3])
        ranked = application_ranking("img1", gt_dump, {"good": good, "poor": poor})
        assert ranked.score_of("good") > ranked.score_of("poor")

    def test_dump_alignment_enforced(self):
        with pytest.raises(ValueError):
            RetrievalDump(query_id="q", result_ids=["a", "b"], scores=[1.0])
