"""Shared fixtures for the evaluation toolkit tests."""

import numpy as np
import pytest

from app.config import Settings
from app.schemas.maps import BinaryMap, Dimensions
from app.services.synth_service import SynthService
from app.utils.image_io import save_binary


def random_binary(rng: np.random.Generator, h: int, w: int, density: float = None) -> BinaryMap:
    density = rng.uniform(0.05, 0.6) if density is None else density
    return BinaryMap(values=rng.random((h, w)) < density)


def random_nonconstant(rng: np.random.Generator, max_size: int = 64, min_size: int = 2) -> BinaryMap:
    while True:
        h = int(rng.integers(min_size, max_size + 1))
        w = int(rng.integers(min_size, max_size + 1))
        m = random_binary(rng, h, w)
        if not m.is_constant:
            return m


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def test_settings():
    return Settings(_env_file=None)


@pytest.fixture
def square_gt():
    """16x16 GT with a 6x6 foreground square at rows/cols 5..10."""
    values = np.zeros((16, 16), dtype=np.uint8)
    values[5:11, 5:11] = 1
    return BinaryMap(values=values)


@pytest.fixture(scope="session")
def synthetic_corpus():
    """200 blob GTs, 64x64, three mildly perturbed model maps each."""
    return SynthService(Settings(_env_file=None)).generate_corpus(200, Dimensions(width=64, height=64), seed=0)


@pytest.fixture
def small_corpus_dir(tmp_path):
    """On-disk corpus of 6 images written through the synth service."""
    manifest = SynthService(Settings(_env_file=None)).write_corpus(
        tmp_path / "corpus", images=6, dims=Dimensions(width=32, height=32), seed=7, triples=True
    )
    return manifest


def write_map(path, rows) -> str:
    save_binary(BinaryMap.from_rows(rows) if not isinstance(rows, BinaryMap) else rows, path)
    return str(path)
