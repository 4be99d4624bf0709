"""Small shared helpers."""

from __future__ import annotations

import zlib

import numpy as np


def substream(seed: int, *labels) -> np.random.Generator:
    """Independent, reproducible RNG stream derived from a root seed.

    Labels (strings or ints) identify the component and, e.g., the forecast
    date, so concurrent work on different dates never shares a stream.
    """
    words = [int(seed) & 0xFFFFFFFF]
    for label in labels:
        if isinstance(label, int):
            words.append(label & 0xFFFFFFFF)
        else:
            words.append(zlib.crc32(str(label).encode()))
    return np.random.default_rng(np.random.SeedSequence(words))
