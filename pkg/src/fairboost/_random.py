"""Seed splitting: one user seed, an independent stream per named consumer."""
import zlib

import numpy as np

_CONSUMERS = {"synthgen": 1, "randomized_predict": 2}


def consumer_rng(seed: int, consumer: str) -> np.random.Generator:
    key = _CONSUMERS.get(consumer, zlib.crc32(consumer.encode()))
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, key])
    return np.random.Generator(np.random.Philox(ss))
