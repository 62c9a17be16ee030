"""Counter-based random streams.

Every stream is keyed by ``(seed, *path)``: a replicate index, a tag such
as ``"noise"`` or ``"theta"``. The key is hashed into a 64-bit seed for a
Philox generator, so a replicate's draws do not depend on how many other
replicates ran before it or on which thread ran it.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed(seed: int, *path: int | str) -> int:
    key = repr((int(seed), *path)).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))
