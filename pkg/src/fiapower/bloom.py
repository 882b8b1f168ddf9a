"""A plain Bloom filter, used to check the closed-form false-positive rate."""

from __future__ import annotations

import hashlib

import numpy as np


class BloomFilter:
    """Bit-array Bloom filter with ``k`` indices from double hashing."""

    def __init__(self, num_bits: int, num_hashes: int):
        if num_bits < 1 or num_hashes < 1:
            raise ValueError("need at least one bit and one hash")
        self.num_bits = num_bits
        self.num_hashes = num_hashes
        self.bits = np.zeros(num_bits, dtype=bool)

    def _indices(self, key: bytes) -> np.ndarray:
        digest = hashlib.blake2b(key, digest_size=16).digest()
        h1 = int.from_bytes(digest[:8], "little")
        h2 = int.from_bytes(digest[8:], "little") | 1
        m = self.num_bits
        return np.array([(h1 + j * h2) % m for j in range(self.num_hashes)], dtype=np.int64)

    def add(self, key: bytes) -> None:
        self.bits[self._indices(key)] = True

    def __contains__(self, key: bytes) -> bool:
        return bool(self.bits[self._indices(key)].all())


def empirical_false_positive_rate(bits_per_key: float, num_keys: int, num_probes: int,
                                  seed: int = 0) -> float:
    """Fill a filter with ``num_keys`` random keys, probe with fresh ones.

    Uses ``round(bits_per_key * ln 2)`` hash functions.
    """
    k = max(1, round(bits_per_key * np.log(2)))
    bf = BloomFilter(int(round(bits_per_key * num_keys)), k)
    rng = np.random.default_rng(seed)
    # inserted keys are even, probes odd, so no probe was inserted
    inserted = rng.integers(0, 2**62, size=num_keys) * 2
    probes = rng.integers(0, 2**62, size=num_probes) * 2 + 1
    for key in inserted.tolist():
        bf.add(key.to_bytes(8, "little"))
    hits = sum(key.to_bytes(8, "little") in bf for key in probes.tolist())
    return hits / num_probes
