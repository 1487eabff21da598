"""Counter-based random streams.

Every stream is a pure function of ``(seed, *key)``: the same tuple always
yields the same draws regardless of which other streams were created or in
what order. That is what lets ensemble members run in any order (or in
parallel) and still merge to identical results.
"""

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox generator addressed by ``seed`` and an index tuple."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
