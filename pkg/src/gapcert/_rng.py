"""Seeded, indexable random streams.

Every sampling operation in the package takes an explicit 64-bit seed and a
stream tag, so distinct pipeline stages (solve, certify, oracle, ...) driven
by the same user seed never share randomness.  Streams are counter-based
(Philox), and batch draws of fixed width per sample make sample i a pure
function of (seed, tag, i): prefixes of a stream are stable when the batch
size grows, and parallel evaluation cannot change results.
"""

from __future__ import annotations

import numpy as np

_SEED_MASK = (1 << 64) - 1

# Stream tags.  One per sampling purpose; never reuse a tag for two purposes.
SOLVE = 1
CERTIFY = 2
SUBSAMPLE = 3
ORACLE = 4
BETTER_FRACTION = 5
LEVEL_SET = 6
GAP_INSTANCE = 7
GAP_SOLVE = 8
GAP_ORACLE = 9
VALIDATE = 10
ENVIRONMENT = 11
FAMILY = 12
DESCENT = 13


def stream(seed: int, *path: int) -> np.random.Generator:
    """Independent generator for (seed, path). Deterministic and platform-stable."""
    ss = np.random.SeedSequence(entropy=int(seed) & _SEED_MASK,
                                spawn_key=tuple(int(p) & _SEED_MASK for p in path))
    return np.random.Generator(np.random.Philox(key=ss.generate_state(2, np.uint64)))


def uniform_block(seed: int, path: tuple[int, ...], n: int, width: int) -> np.ndarray:
    """(n, width) uniforms in [0, 1) where row i depends only on (seed, path, i).

    Rows are consecutive fixed-width slices of one counter-based stream, so the
    first n' rows are identical for any n >= n' (prefix property).
    """
    return stream(seed, *path).random((int(n), int(width)))


def child_seed(seed: int, *path: int) -> int:
    """Derive a replayable 64-bit seed for a sub-task (e.g. one family instance)."""
    ss = np.random.SeedSequence(entropy=int(seed) & _SEED_MASK,
                                spawn_key=tuple(int(p) & _SEED_MASK for p in path))
    return int(ss.generate_state(1, np.uint64)[0])
