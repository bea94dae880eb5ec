"""Tests for the meta-measure harness."""

import json

import numpy as np
import pytest

from app.config import Settings
from app.core.maps import mean_value
from app.schemas.manifest import QueryEntry
from app.schemas.maps import BinaryMap
from app.schemas.meta import CandidateSet, HumanRankedTriple, MetaMeasure, TrivialMapSource
from app.schemas.ranking import RetrievalDump
from app.schemas.run import RunConfig
from app.services.meta_service import MetaService
from app.utils.image_io import save_binary
from app.utils.validators import ManifestError, ValidationError

MEASURES = ["emeasure", "f1", "iou", "fbw"]


def square(size=16, lo=5, hi=11):
    values = np.zeros((size, size), dtype=np.uint8)
    values[lo:hi, lo:hi] = 1
    return BinaryMap(values=values)


def with_extra_rows(gt: BinaryMap, count: int) -> BinaryMap:
    """GT plus `count` false-positive pixels along the top rows."""
    values = gt.values.copy()
    flat = values.reshape(-1)
    flat[:count] = 1
    return BinaryMap(values=values)


def graded_set(image_id: str, scores) -> CandidateSet:
    """Candidate set whose f1 model mean decreases with the number of extra pixels."""
    gt = square()
    return CandidateSet(image_id=image_id, gt=gt, models={f"m{i}": with_extra_rows(gt, n) for i, n in enumerate(scores)})


@pytest.fixture
def service():
    return MetaService(Settings(_env_file=None))


class TestSelection:
    def test_keep_all(self, service, synthetic_corpus):
        subset = synthetic_corpus[:10]
        assert sorted(service.select_good_images(subset, "f1", 1.0)) == [s.image_id for s in subset]

    def test_keeps_best_half(self, service):
        sets = [graded_set("good", [0]), graded_set("poor", [60])]
        assert service.select_good_images(sets, "f1", 0.5) == ["good"]

    def test_floor_convention(self, service, synthetic_corpus):
        assert len(service.select_good_images(synthetic_corpus[:10], "emeasure", 0.8)) == 8
        assert len(service.select_good_images(synthetic_corpus[:3], "emeasure", 0.1)) == 1

    def test_monotone_in_keep_fraction(self, service, synthetic_corpus):
        subset = synthetic_corpus[:20]
        smaller = set(service.select_good_images(subset, "f1", 0.3))
        larger = set(service.select_good_images(subset, "f1", 0.7))
        assert smaller <= larger

    def test_empty_input(self, service):
        with pytest.raises(ValidationError):
            service.select_good_images([], "f1", 0.8)

    def test_invalid_fraction(self, service, synthetic_corpus):
        with pytest.raises(ValidationError):
            service.select_good_images(synthetic_corpus[:2], "f1", 0.0)


class TestMisrank:
    def test_adversarial_trivial_map(self, service):
        sets = [graded_set("a", [3, 6]), graded_set("b", [0])]
        result = service.misrank_rate(sets, TrivialMapSource.GENERIC, "f1", 0,
                                      trivial_factory=lambda candidate, seed: candidate.gt)
        # image b has a perfect model mean, so the tie is not a mis-rank
        assert result.value == 0.5
        assert result.population == 2
        assert result.meta_id == MetaMeasure.MM2

    @pytest.mark.parametrize("measure", MEASURES)
    @pytest.mark.parametrize("source", list(TrivialMapSource))
    def test_perfect_models_never_misranked(self, service, measure, source):
        sets = [graded_set(f"img{i}", [0, 0]) for i in range(4)]
        assert service.misrank_rate(sets, source, measure, seed=1).value == 0.0

    def test_noise_trivial_map_is_dense(self, service, synthetic_corpus):
        for candidate in synthetic_corpus[:20]:
            noise = service.trivial_map(TrivialMapSource.NOISE, candidate, seed=0)
            assert noise.dimensions == candidate.gt.dimensions
            assert 0.25 <= mean_value(noise) <= 0.75

    def test_deterministic(self, service, synthetic_corpus):
        subset = synthetic_corpus[:30]
        a = service.misrank_rate(subset, TrivialMapSource.NOISE, "f1", seed=4)
        b = service.misrank_rate(subset, TrivialMapSource.NOISE, "f1", seed=4)
        assert a == b

    def test_parallel_matches_serial(self, synthetic_corpus):
        subset = synthetic_corpus[:30]
        serial = MetaService(Settings(_env_file=None), jobs=1)
        parallel = MetaService(Settings(_env_file=None), jobs=8)
        for source in TrivialMapSource:
            assert serial.misrank_rate(subset, source, "iou", 2) == parallel.misrank_rate(subset, source, "iou", 2)

    @pytest.mark.slow
    def test_emeasure_never_prefers_noise(self, service, synthetic_corpus):
        selected_ids = set(service.select_good_images(synthetic_corpus, "emeasure"))
        selected = [s for s in synthetic_corpus if s.image_id in selected_ids]
        result = service.misrank_rate(selected, TrivialMapSource.NOISE, "emeasure", seed=0)
        assert result.meta_id == MetaMeasure.MM3
        assert result.value == 0.0
        assert result.population == 160


class TestGtSwitch:
    def test_needs_two_images(self, service):
        with pytest.raises(ValidationError):
            service.mm5_gt_switch_rate([graded_set("a", [0])], "emeasure", 0)

    def test_duplicate_gt_never_counted(self, service):
        sets = [graded_set("a", [0, 2]), graded_set("b", [1, 3])]
        result = service.mm5_gt_switch_rate(sets, "emeasure", 0)
        assert result.value == 0.0
        assert result.population == 4

    def test_perfect_map_never_counted(self, service, synthetic_corpus):
        sets = [
            CandidateSet(image_id=s.image_id, gt=s.gt, models={"exact": s.gt})
            for s in synthetic_corpus[:20]
        ]
        result = service.mm5_gt_switch_rate(sets, "emeasure", 3)
        assert result.value == 0.0
        assert result.population == 20

    def test_wrong_gt_resized(self, service):
        small = CandidateSet(image_id="small", gt=square(8, 2, 6), models={"m": square(8, 2, 6)})
        large = CandidateSet(image_id="large", gt=square(), models={"m": square()})
        result = service.mm5_gt_switch_rate([small, large], "f1", 0)
        assert result.population == 2

    @pytest.mark.slow
    def test_emeasure_switch_rate_on_synthetic_corpus(self, service, synthetic_corpus):
        result = service.mm5_gt_switch_rate(synthetic_corpus, "emeasure", 0)
        assert result.population > 0
        assert result.value <= 0.005


def write_triple(tmp_path, name, ranks) -> HumanRankedTriple:
    gt = square()
    gt_path = save_binary(gt, tmp_path / f"{name}_gt.png")
    paths = [save_binary(with_extra_rows(gt, n), tmp_path / f"{name}_{i}.png") for i, n in enumerate((0, 8, 24))]
    return HumanRankedTriple(image_id=name, gt_path=gt_path, map_paths=paths, human_ranks=ranks)


class TestHumanTheta:
    def test_matching_order(self, service, tmp_path):
        triples = [write_triple(tmp_path, f"t{i}", [1, 2, 3]) for i in range(3)]
        result = service.mm4_human_theta(triples, "f1")
        assert result.value == pytest.approx(0.0)
        assert result.population == 3

    def test_reversed_order(self, service, tmp_path):
        triples = [write_triple(tmp_path, f"t{i}", [3, 2, 1]) for i in range(2)]
        assert service.mm4_human_theta(triples, "f1").value == pytest.approx(2.0)

    def test_single_swap(self, service, tmp_path):
        result = service.mm4_human_theta([write_triple(tmp_path, "t", [1, 3, 2])], "f1")
        assert result.value == pytest.approx(0.5)

    def test_unreadable_triple_skipped(self, service, tmp_path):
        good = write_triple(tmp_path, "good", [1, 2, 3])
        broken = good.model_copy(update={"image_id": "broken", "gt_path": tmp_path / "missing.png"})
        result = service.mm4_human_theta([good, broken], "f1")
        assert result.population == 1
        assert [f.image_id for f in service.failures] == ["broken"]

    def test_no_readable_triples(self, service, tmp_path):
        triple = write_triple(tmp_path, "t", [1, 2, 3])
        broken = triple.model_copy(update={"gt_path": tmp_path / "missing.png"})
        with pytest.raises(ValidationError):
            service.mm4_human_theta([broken], "f1")


class TestApplicationTheta:
    def test_agreeing_rankings(self, service):
        sets = [graded_set("img1", [0, 10])]
        dumps = {
            "g": RetrievalDump(query_id="g", result_ids=["img1", "x", "y"], scores=[1.0, 0.9, 0.8]),
            "q0": RetrievalDump(query_id="q0", result_ids=["img1", "x"], scores=[0.9, 0.5]),
            "q1": RetrievalDump(query_id="q1", result_ids=["z"], scores=[0.2]),
        }
        queries = [QueryEntry(image_id="img1", gt_query="g", model_queries={"m0": "q0", "m1": "q1"})]
        result = service.mm1_application_theta(sets, "f1", dumps, queries)
        assert result.meta_id == MetaMeasure.MM1
        assert result.value == pytest.approx(0.0)

    def test_needs_two_models(self, service):
        sets = [graded_set("img1", [0])]
        dumps = {"g": RetrievalDump(query_id="g", result_ids=[], scores=[])}
        queries = [QueryEntry(image_id="img1", gt_query="g", model_queries={"m0": "g"})]
        with pytest.raises(ValidationError):
            service.mm1_application_theta(sets, "f1", dumps, queries)


class TestRunMeta:
    def test_mm2_one_result_per_measure(self, service, small_corpus_dir):
        cfg = RunConfig(manifest=small_corpus_dir, measures=["emeasure", "f1"], seed=0)
        results = service.run_meta(cfg, MetaMeasure.MM2)
        assert [r.measure_id for r in results] == ["emeasure", "f1"]
        assert all(r.meta_id == MetaMeasure.MM2 for r in results)
        assert all(r.population == 4 for r in results)

    def test_mm4_uses_triples_section(self, service, small_corpus_dir):
        cfg = RunConfig(manifest=small_corpus_dir, measures=["f1"])
        [result] = service.run_meta(cfg, MetaMeasure.MM4)
        assert result.population == 6
        assert result.value == pytest.approx(0.0)

    def test_mm1_requires_retrieval_section(self, service, small_corpus_dir):
        cfg = RunConfig(manifest=small_corpus_dir, measures=["f1"])
        with pytest.raises(ManifestError):
            service.run_meta(cfg, MetaMeasure.MM1)

    def test_mm2_perfect_corpus(self, service, tmp_path):
        gt_path = save_binary(square(), tmp_path / "gt.png")
        manifest = {
            "images": [
                {"id": f"img{i}", "gt": gt_path.name, "models": [{"name": "m", "path": gt_path.name}]}
                for i in range(3)
            ]
        }
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps(manifest), encoding="utf-8")
        cfg = RunConfig(manifest=path, measures=MEASURES)
        for result in service.run_meta(cfg, MetaMeasure.MM2):
            assert result.value == 0.0
