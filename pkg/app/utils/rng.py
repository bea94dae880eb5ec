"""
Seedable random streams.

Every stream is a numpy PCG64 generator seeded from (master seed, stable hash of
the item key), so parallel and serial runs draw identical numbers per item.
"""

import hashlib

import numpy as np


def stable_hash(*parts: str) -> int:
    """跨平台穩定的 64-bit 雜湊（不受 PYTHONHASHSEED 影響）"""
    digest = hashlib.blake2b("\x1f".join(parts).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def item_stream(master_seed: int, *key: str) -> np.random.Generator:
    """依主種子與項目鍵建立獨立的亂數串流"""
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF]
    if key:
        entropy.append(stable_hash(*key))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))
