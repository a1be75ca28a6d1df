"""Feature-subset masks and subset enumeration.

A coalition of features is represented as an immutable bitmask over the
index set {0, ..., p-1}.  Bit j set means feature j is a member.  All set
operations are O(1) bit arithmetic, and masks hash cheaply, which makes
them good dictionary keys for memoized cost values.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = ["SubsetMask", "subsets_of_size", "all_subsets"]


@dataclass(frozen=True, slots=True)
class SubsetMask:
    """An immutable subset of the feature index set {0, ..., p-1}."""

    bits: int
    p: int

    def __post_init__(self) -> None:
        if self.p < 0:
            raise ValueError(f"feature count must be non-negative, got {self.p}")
        if self.bits < 0 or self.bits >> self.p:
            raise ValueError(f"mask {self.bits:#x} has bits outside range(0, {self.p})")

    @classmethod
    def empty(cls, p: int) -> "SubsetMask":
        return cls(0, p)

    @classmethod
    def full(cls, p: int) -> "SubsetMask":
        return cls((1 << p) - 1, p)

    @classmethod
    def from_indices(cls, indices: Iterable[int], p: int) -> "SubsetMask":
        bits = 0
        for i in indices:
            if not 0 <= i < p:
                raise ValueError(f"feature index {i} out of range(0, {p})")
            bits |= 1 << i
        return cls(bits, p)

    @property
    def cardinality(self) -> int:
        return self.bits.bit_count()

    def contains(self, i: int) -> bool:
        return bool((self.bits >> i) & 1)

    def add(self, i: int) -> "SubsetMask":
        if not 0 <= i < self.p:
            raise ValueError(f"feature index {i} out of range(0, {self.p})")
        return SubsetMask(self.bits | (1 << i), self.p)

    def remove(self, i: int) -> "SubsetMask":
        return SubsetMask(self.bits & ~(1 << i), self.p)

    def complement(self) -> "SubsetMask":
        return SubsetMask(((1 << self.p) - 1) ^ self.bits, self.p)

    def union(self, other: "SubsetMask") -> "SubsetMask":
        self._check_same_p(other)
        return SubsetMask(self.bits | other.bits, self.p)

    def intersect(self, other: "SubsetMask") -> "SubsetMask":
        self._check_same_p(other)
        return SubsetMask(self.bits & other.bits, self.p)

    def issubset(self, other: "SubsetMask") -> bool:
        self._check_same_p(other)
        return self.bits & ~other.bits == 0

    def indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.p) if (self.bits >> i) & 1)

    def to_bool_array(self) -> np.ndarray:
        out = np.zeros(self.p, dtype=bool)
        for i in self.indices():
            out[i] = True
        return out

    def _check_same_p(self, other: "SubsetMask") -> None:
        if self.p != other.p:
            raise ValueError(f"mask sizes differ: {self.p} vs {other.p}")

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices())

    def __len__(self) -> int:
        return self.cardinality

    def __repr__(self) -> str:
        return f"SubsetMask({{{', '.join(map(str, self.indices()))}}}, p={self.p})"


def subsets_of_size(p: int, size: int, exclude: int | None = None) -> Iterator[SubsetMask]:
    """Yield all subsets of {0,...,p-1} with the given cardinality.

    Enumeration order is lexicographic on the sorted index tuples, so it is
    deterministic.  ``exclude`` restricts the ground set to {0,...,p-1} minus
    that index (the masks still live in the full p-feature space).
    """
    if exclude is None:
        ground: Sequence[int] = range(p)
    else:
        ground = [i for i in range(p) if i != exclude]
    for combo in combinations(ground, size):
        yield SubsetMask.from_indices(combo, p)


def all_subsets(p: int) -> Iterator[SubsetMask]:
    """Yield every subset of {0,...,p-1}, by cardinality then lexicographic."""
    for size in range(p + 1):
        yield from subsets_of_size(p, size)
