"""Tests for trivial maps, perturbations and the synthetic corpus generator."""

import json

import numpy as np
import pytest

from app.config import Settings
from app.core.maps import mean_value, shift_map
from app.core.synthetic import (
    PerturbKind,
    gaussian_noise_map,
    generic_circle,
    perturb,
    random_blob_gt,
)
from app.schemas.maps import BinaryMap, Dimensions
from app.services.synth_service import SynthService
from app.utils.image_io import load_binary
from app.utils.rng import item_stream
from app.utils.validators import DegenerateMapError


def dims(w, h):
    return Dimensions(width=w, height=h)


class TestGenericCircle:
    def test_single_pixel(self):
        np.testing.assert_array_equal(generic_circle(dims(1, 1)).values, [[1]])

    def test_8x8_matches_point_in_disk(self):
        circle = generic_circle(dims(8, 8))
        expected = sum(
            1 for y in range(8) for x in range(8) if (x + 0.5 - 4) ** 2 + (y + 0.5 - 4) ** 2 <= 4
        )
        assert circle.foreground_count == expected == 12

    def test_mirror_symmetry(self):
        for w, h in [(8, 8), (17, 11), (64, 48)]:
            v = generic_circle(dims(w, h)).values
            np.testing.assert_array_equal(v, v[::-1, :])
            np.testing.assert_array_equal(v, v[:, ::-1])

    def test_radius_ratio_configurable(self):
        assert generic_circle(dims(32, 32), 0.4).foreground_count > generic_circle(dims(32, 32)).foreground_count


class TestNoiseMap:
    def test_same_seed_identical(self):
        assert gaussian_noise_map(dims(64, 64), 5) == gaussian_noise_map(dims(64, 64), 5)

    def test_distinct_seeds_differ(self):
        for seed in range(200):
            assert gaussian_noise_map(dims(16, 16), seed) != gaussian_noise_map(dims(16, 16), seed + 1000)

    def test_density_band(self):
        for seed in range(200):
            density = mean_value(gaussian_noise_map(dims(16, 16), seed))
            assert 0.25 <= density <= 0.75

    def test_wide_noise_density_band(self):
        for seed in range(100):
            density = mean_value(gaussian_noise_map(dims(64, 64), seed, std=1.0))
            assert 0.25 <= density <= 0.75

    def test_model_adaptive_factor_gives_sparse_noise(self):
        # twice the mean of N(0.5, 0.15) lands on the 1 - eps ceiling
        for seed in range(20):
            density = mean_value(gaussian_noise_map(dims(64, 64), seed, factor=2.0))
            assert density <= 0.005

    def test_image_key_gives_independent_streams(self):
        a = gaussian_noise_map(dims(32, 32), 0, key="img0001")
        b = gaussian_noise_map(dims(32, 32), 0, key="img0002")
        assert a != b

    def test_factor_setting_validated(self):
        current = Settings(_env_file=None, NOISE_THRESHOLD_FACTOR=0.0)
        assert current.validate_required_settings() == ["NOISE_THRESHOLD_FACTOR"]


class TestPerturb:
    def setup_method(self):
        values = np.zeros((5, 5), dtype=np.uint8)
        values[2, 2] = 1
        self.dot = BinaryMap(values=values)

    def test_zero_magnitude_identity(self):
        for kind in PerturbKind:
            assert perturb(self.dot, kind, 0, 3) == self.dot

    def test_dilate_single_pixel(self):
        expected = np.zeros((5, 5), dtype=np.uint8)
        expected[1:4, 1:4] = 1
        np.testing.assert_array_equal(perturb(self.dot, PerturbKind.DILATE, 1, 0).values, expected)

    def test_shift_composes(self):
        values = np.zeros((10, 10), dtype=np.uint8)
        values[3:7, 3:7] = 1
        gt = BinaryMap(values=values)
        once = perturb(perturb(gt, PerturbKind.SHIFT, 1, 9), PerturbKind.SHIFT, 1, 9)
        assert once == perturb(gt, PerturbKind.SHIFT, 2, 9)

    def test_shift_map_composes(self):
        values = np.zeros((10, 10), dtype=np.uint8)
        values[3:7, 3:7] = 1
        gt = BinaryMap(values=values)
        assert shift_map(shift_map(gt, 1, 0), 1, 0) == shift_map(gt, 2, 0)

    def test_erode_to_empty_raises(self):
        with pytest.raises(DegenerateMapError):
            perturb(self.dot, PerturbKind.ERODE, 1, 0)

    def test_flip_noise_deterministic(self):
        gt = random_blob_gt(dims(32, 32), item_stream(0, "gt"))
        assert perturb(gt, PerturbKind.FLIP_NOISE, 20, 4) == perturb(gt, PerturbKind.FLIP_NOISE, 20, 4)
        assert perturb(gt, PerturbKind.FLIP_NOISE, 20, 4) != gt

    def test_negative_magnitude(self):
        with pytest.raises(ValueError):
            perturb(self.dot, PerturbKind.DILATE, -1, 0)


class TestCorpus:
    def test_generation_is_deterministic(self):
        service = SynthService(Settings(_env_file=None))
        a = service.generate_corpus(5, dims(32, 32), seed=3)
        b = service.generate_corpus(5, dims(32, 32), seed=3)
        assert [s.gt for s in a] == [s.gt for s in b]
        assert [s.models for s in a] == [s.models for s in b]

    def test_blob_gts_are_not_constant(self, synthetic_corpus):
        assert len(synthetic_corpus) == 200
        for candidate in synthetic_corpus:
            assert not candidate.gt.is_constant
            assert len(candidate.models) == 3

    def test_written_manifest(self, small_corpus_dir):
        data = json.loads(small_corpus_dir.read_text(encoding="utf-8"))
        assert len(data["images"]) == 6
        assert len(data["triples"]) == 6
        first = data["images"][0]
        gt = load_binary(small_corpus_dir.parent / first["gt"])
        assert gt.dimensions == dims(32, 32)
        for triple in data["triples"]:
            assert sorted(triple["ranks"]) == [1, 2, 3]

    def test_triples_follow_severity(self):
        service = SynthService(Settings(_env_file=None))
        sets = service.generate_corpus(3, dims(32, 32), seed=1)
        for triple in service.generate_triples(sets, seed=1):
            errors = {rank: int((fm.values != triple.gt.values).sum()) for fm, rank in zip(triple.maps, triple.ranks)}
            assert errors[1] < errors[2] < errors[3]
