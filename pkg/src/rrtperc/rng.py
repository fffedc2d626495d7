"""Random streams.

All randomness flows through :class:`numpy.random.Generator` objects backed
by PCG64 and seeded through :class:`numpy.random.SeedSequence`. A replicate
stream is keyed by ``(master seed, crc32(experiment name), replicate index)``
via the seed sequence's spawn key, so adding replicates or experiments never
perturbs the streams that already exist.
"""
from __future__ import annotations

import zlib

import numpy as np

Generator = np.random.Generator


def make_rng(seed: int | None = None) -> Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def replicate_rng(seed: int, name: str, index: int) -> Generator:
    """Private stream for replicate ``index`` of experiment ``name``."""
    key = (zlib.crc32(name.encode("utf-8")), int(index))
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.PCG64(ss))


def as_rng(rng: Generator | int | None) -> Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(rng)
