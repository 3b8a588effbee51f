"""Bounded decision spaces with seeded uniform samplers.

A decision space needs a finite volume (or finite cardinality), a uniform
sampler, and a membership test.  Finite spaces additionally support
enumeration so that exact quantities (true minima, exceedance probabilities)
can be computed by brute force.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _rng


class SpaceError(ValueError):
    """Invalid space definition or unsupported space operation."""


@dataclass(frozen=True)
class BoxSpace:
    """Axis-aligned box with per-dimension bounds, sampled uniformly by volume."""

    lower: np.ndarray
    upper: np.ndarray

    def __init__(self, lower, upper):
        lo = np.atleast_1d(np.asarray(lower, dtype=float))
        hi = np.atleast_1d(np.asarray(upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise SpaceError("lower and upper must be 1-D arrays of equal length")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise SpaceError("box bounds must be finite")
        if not (lo < hi).all():
            raise SpaceError("each lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def cardinality(self) -> int | None:
        return None

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def sample(self, seed: int, n: int, path: tuple[int, ...] = ()) -> np.ndarray:
        u = _rng.uniform_block(seed, path, n, self.dim)
        return self.lower + u * (self.upper - self.lower)

    def contains(self, decision) -> bool:
        d = np.asarray(decision, dtype=float)
        return d.shape == self.lower.shape and bool(
            (d >= self.lower).all() and (d <= self.upper).all())

    def project(self, point) -> np.ndarray:
        return np.clip(np.asarray(point, dtype=float), self.lower, self.upper)

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.lower, self.upper


@dataclass(frozen=True)
class PermutationSpace:
    """All orderings of n items; cardinality n!.

    Sampling runs one Fisher-Yates shuffle per row, driven by that row's
    fixed-width uniform block, which is exactly uniform over the n! orderings.
    """

    n_items: int

    def __post_init__(self):
        if self.n_items < 2:
            raise SpaceError("a permutation space needs at least 2 items")

    @property
    def cardinality(self) -> int:
        return math.factorial(self.n_items)

    def sample(self, seed: int, n: int, path: tuple[int, ...] = ()) -> np.ndarray:
        k = self.n_items
        u = _rng.uniform_block(seed, path, n, k - 1)
        perms = np.tile(np.arange(k), (int(n), 1))
        rows = np.arange(int(n))
        for j in range(k - 1, 0, -1):
            r = (u[:, k - 1 - j] * (j + 1)).astype(np.intp)  # uniform on 0..j
            pj = perms[rows, j].copy()
            perms[rows, j] = perms[rows, r]
            perms[rows, r] = pj
        return perms

    def contains(self, decision) -> bool:
        d = np.asarray(decision)
        return d.shape == (self.n_items,) and np.array_equal(
            np.sort(d), np.arange(self.n_items))

    def enumerate(self, chunk: int = 10000) -> Iterator[np.ndarray]:
        """Yield all permutations in lexicographic order, as (chunk, n) arrays."""
        it = itertools.permutations(range(self.n_items))
        while True:
            block = list(itertools.islice(it, chunk))
            if not block:
                return
            yield np.asarray(block, dtype=np.intp)
