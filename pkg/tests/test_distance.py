"""Tests for the exact Euclidean distance transform."""

import numpy as np
import pytest
from scipy import ndimage

from app.core.distance import edt_with_indices
from app.core.reference import naive_nearest


class TestEdt:
    def test_single_pixel(self):
        mask = np.zeros((3, 3), dtype=bool)
        mask[1, 1] = True
        dist, rows, cols = edt_with_indices(mask)
        np.testing.assert_allclose(dist[0, 0], np.sqrt(2))
        assert dist[1, 1] == 0
        assert (rows == 1).all() and (cols == 1).all()

    def test_empty_mask_rejected(self):
        with pytest.raises(ValueError):
            edt_with_indices(np.zeros((4, 4), dtype=bool))

    def test_distances_match_scipy(self, rng):
        for _ in range(50):
            mask = rng.random((int(rng.integers(1, 40)), int(rng.integers(1, 40)))) < 0.1
            if not mask.any():
                continue
            dist, _, _ = edt_with_indices(mask)
            np.testing.assert_allclose(dist, ndimage.distance_transform_edt(~mask), atol=1e-12)

    def test_tie_break_matches_naive(self, rng):
        for _ in range(30):
            h, w = int(rng.integers(1, 16)), int(rng.integers(1, 16))
            mask = rng.random((h, w)) < 0.2
            if not mask.any():
                continue
            foreground = [(y, x) for y in range(h) for x in range(w) if mask[y, x]]
            dist, rows, cols = edt_with_indices(mask)
            for y in range(h):
                for x in range(w):
                    d, ny, nx = naive_nearest(foreground, y, x)
                    assert dist[y, x] == pytest.approx(d, abs=1e-12)
                    assert (rows[y, x], cols[y, x]) == (ny, nx)

    def test_equidistant_prefers_smaller_column(self):
        mask = np.zeros((1, 3), dtype=bool)
        mask[0, 0] = mask[0, 2] = True
        _, rows, cols = edt_with_indices(mask)
        assert cols[0, 1] == 0

    def test_three_way_tie_prefers_smallest_column(self):
        mask = np.zeros((3, 5), dtype=bool)
        mask[0, 0] = mask[0, 4] = mask[2, 2] = True
        dist, rows, cols = edt_with_indices(mask)
        assert dist[0, 2] == 2.0
        assert (rows[0, 2], cols[0, 2]) == (0, 0)

    def test_equidistant_rows_prefer_smaller_row(self):
        mask = np.zeros((3, 1), dtype=bool)
        mask[0, 0] = mask[2, 0] = True
        _, rows, _ = edt_with_indices(mask)
        assert rows[1, 0] == 0

    def test_wide_map_matches_scipy(self, rng):
        mask = rng.random((20, 300)) < 0.01
        mask[10, 150] = True
        dist, rows, cols = edt_with_indices(mask)
        np.testing.assert_allclose(dist, ndimage.distance_transform_edt(~mask), atol=1e-12)
        assert mask[rows, cols].all()
