"""
Seed-derived random streams.

Every random draw in gossipdyn comes from a generator keyed by
(seed, stream, time), so any cell can be recomputed without storing it.
"""
from __future__ import annotations

import numpy as np

from edge_dynamics.errors import InvalidParamsError

# Stream tags
INIT = 0
EDGES = 1
PROTOCOL = 2
REFRESH = 3
CFTP = 4
TRIAL = 5
SOURCE = 6
STRONG_TIME = 7


def _zigzag(time: int) -> int:
    # Maps ..., -2, -1, 0, 1, 2, ... onto 3, 1, 0, 2, 4, ...
    return 2 * time if time >= 0 else -2 * time - 1


def generator(seed: int, stream: int, time: int = 0) -> np.random.Generator:
    if seed < 0:
        raise InvalidParamsError(f"seed must be a non-negative integer, got {seed}")
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(stream, _zigzag(int(time))))
    return np.random.Generator(np.random.PCG64(sequence))


def edge_uniforms(seed: int, stream: int, time: int, m: int) -> np.ndarray:
    """Uniforms in [0, 1) for all m edges at one time step; entry e belongs to edge e."""
    return generator(seed, stream, time).random(m)


def derive_seed(seed: int, *keys: int) -> int:
    """Child seed for (seed, keys), e.g. one trial of one grid cell."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(TRIAL, *map(int, keys)))
    return int(sequence.generate_state(1, np.uint64)[0] >> np.uint64(1))
