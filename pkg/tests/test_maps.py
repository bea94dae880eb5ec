"""Tests for pixel-map types and pure map transforms."""

import numpy as np
import pytest

from app.core.maps import (
    adaptive_threshold,
    binarize_adaptive,
    binarize_fixed,
    complement,
    mean_value,
    resize_nn,
    shift_map,
)
from app.schemas.maps import BinaryMap, Dimensions, GrayMap

from tests.conftest import random_binary


class TestMapTypes:
    def test_binary_rejects_non_binary_values(self):
        with pytest.raises(ValueError):
            BinaryMap.from_rows([[0, 2], [1, 0]])

    def test_gray_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            GrayMap.from_rows([[0.5, 1.2]])

    def test_empty_grid_rejected(self):
        with pytest.raises(ValueError):
            BinaryMap(values=np.zeros((0, 3)))

    def test_values_are_read_only(self):
        m = BinaryMap.from_rows([[1, 0]])
        with pytest.raises(ValueError):
            m.values[0, 0] = 0

    def test_dimensions_follow_width_height(self):
        m = BinaryMap(values=np.zeros((3, 5)))
        assert m.dimensions == Dimensions(width=5, height=3)
        assert str(m.dimensions) == "5x3"

    def test_equality_by_content(self):
        assert BinaryMap.from_rows([[1, 0]]) == BinaryMap.from_rows([[1, 0]])
        assert BinaryMap.from_rows([[1, 0]]) != BinaryMap.from_rows([[0, 1]])


class TestBinarize:
    def test_fixed_threshold_is_inclusive(self):
        g = GrayMap.from_rows([[0.2, 0.5, 0.7]])
        assert binarize_fixed(g, 0.5) == BinaryMap.from_rows([[0, 1, 1]])

    def test_fixed_threshold_bounds(self):
        g = GrayMap.from_rows([[0.0, 0.3, 1.0]])
        assert binarize_fixed(g, 0.0).foreground_count == 3
        assert binarize_fixed(g, 1.0) == BinaryMap.from_rows([[0, 0, 1]])

    def test_fixed_output_is_binary_for_any_input(self, rng):
        for _ in range(200):
            h, w = int(rng.integers(1, 32)), int(rng.integers(1, 32))
            g = GrayMap(values=rng.random((h, w)))
            t = float(rng.random())
            b = binarize_fixed(g, t)
            assert b.values.dtype == np.uint8
            assert set(np.unique(b.values)) <= {0, 1}
            np.testing.assert_array_equal(b.values == 1, g.values >= t)

    def test_adaptive_uses_twice_the_mean(self):
        g = GrayMap.from_rows([[0.1, 0.1, 0.1, 0.5]])
        assert adaptive_threshold(g) == pytest.approx(0.4)
        assert binarize_adaptive(g) == BinaryMap.from_rows([[0, 0, 0, 1]])

    def test_adaptive_single_bright_pixel(self):
        g = GrayMap.from_rows([[0.1, 0.1, 0.1, 0.9]])
        assert adaptive_threshold(g) == pytest.approx(0.6)
        assert binarize_adaptive(g) == BinaryMap.from_rows([[0, 0, 0, 1]])

    def test_adaptive_threshold_capped_below_one(self):
        g = GrayMap.from_rows([[1.0, 1.0], [1.0, 1.0]])
        assert binarize_adaptive(g).foreground_count == 4

    def test_adaptive_all_zero_input(self):
        g = GrayMap(values=np.zeros((4, 4)))
        assert binarize_adaptive(g).foreground_count == 0


class TestTransforms:
    def test_complement_involution(self, rng):
        for _ in range(50):
            m = random_binary(rng, int(rng.integers(1, 20)), int(rng.integers(1, 20)))
            assert complement(complement(m)) == m

    def test_complement_mean(self, rng):
        for size in (1, 2, 4, 8, 16, 32):
            m = random_binary(rng, size, size)
            assert mean_value(complement(m)) == 1.0 - mean_value(m)

    def test_mean_value(self):
        assert mean_value(BinaryMap.from_rows([[1, 0], [0, 0]])) == 0.25

    def test_resize_identity(self, rng):
        m = random_binary(rng, 7, 9)
        assert resize_nn(m, m.dimensions) == m

    def test_resize_upsample_nearest(self):
        m = BinaryMap.from_rows([[1, 0], [0, 1]])
        out = resize_nn(m, Dimensions(width=4, height=4))
        expected = np.array([[1, 1, 0, 0], [1, 1, 0, 0], [0, 0, 1, 1], [0, 0, 1, 1]])
        np.testing.assert_array_equal(out.values, expected)

    def test_resize_downsample_picks_floor_source(self):
        m = BinaryMap.from_rows([[1, 0, 0, 1]])
        out = resize_nn(m, Dimensions(width=2, height=1))
        np.testing.assert_array_equal(out.values, [[1, 0]])

    def test_shift_drops_and_fills(self):
        m = BinaryMap.from_rows([[1, 0, 1]])
        np.testing.assert_array_equal(shift_map(m, 1, 0).values, [[0, 1, 0]])
        np.testing.assert_array_equal(shift_map(m, -1, 0).values, [[0, 1, 0]])
        assert shift_map(m, 3, 0).foreground_count == 0
