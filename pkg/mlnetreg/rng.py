"""Seeded random streams.

Every sampler in the package draws from a Philox counter-based generator
keyed by a :class:`numpy.random.SeedSequence`.  A seed is either a plain
integer or a ``(master_seed, *stream)`` tuple; the stream components become
the sequence's ``spawn_key`` so ``(master, N, rep, k)`` streams are
independent and reproducible across platforms.
"""

from __future__ import annotations

from typing import Sequence, Tuple, Union

import numpy as np

SeedLike = Union[int, Sequence[int], np.random.Generator]


def make_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (int, np.integer)):
        sequence = np.random.SeedSequence(int(seed))
    else:
        parts = [int(part) for part in seed]
        if not parts:
            raise ValueError("seed tuple must contain at least the master seed")
        sequence = np.random.SeedSequence(parts[0], spawn_key=tuple(parts[1:]))
    return np.random.Generator(np.random.Philox(sequence))


def stream(seed: SeedLike, *keys: int) -> Tuple[int, ...]:
    """Extend ``seed`` with additional stream keys."""

    if isinstance(seed, np.random.Generator):
        raise TypeError("cannot derive a stream from a live generator")
    if isinstance(seed, (int, np.integer)):
        return (int(seed), *keys)
    return (*(int(part) for part in seed), *keys)
