"""Subset lattice combinatorics.

Sets of items 1..N are stored as bit masks (item ``k`` is bit ``k - 1``).
Within a level, sets are ordered colexicographically, which for bit masks is
simply increasing integer value.  The colex rank of a set with sorted 0-based
positions ``c_0 < c_1 < ... < c_{k-1}`` is ``sum_m C(c_m, m + 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

MAX_ITEMS = 32
_INT64_MAX = np.iinfo(np.int64).max


class LatticeError(ValueError):
    pass


def binomial(n: int, k: int) -> int:
    """Exact C(n, k); zero outside ``0 <= k <= n``.

    Python integers never wrap, so the only overflow that can occur is when a
    count is forced into a fixed-width array index; see :func:`checked_size`.
    """
    if n < 0:
        raise LatticeError(f"binomial needs n >= 0, got {n}")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def checked_size(count: int) -> int:
    """Return ``count`` if it fits an int64 array index, else raise."""
    if count > _INT64_MAX:
        raise OverflowError(f"count {count} exceeds int64 range")
    return int(count)


def level_size(N: int, i: int) -> int:
    if not 0 <= i <= N:
        raise LatticeError(f"level {i} outside 0..{N}")
    return binomial(N, i)


@dataclass(frozen=True, order=True)
class ItemSet:
    """A subset of items 1..N held as a membership bit mask."""

    bits: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> MAX_ITEMS:
            raise LatticeError(f"bit mask {self.bits:#x} outside items 1..{MAX_ITEMS}")

    @classmethod
    def of(cls, *items: int) -> "ItemSet":
        return cls.from_items(items)

    @classmethod
    def from_items(cls, items: Iterable[int]) -> "ItemSet":
        bits = 0
        for it in items:
            if not 1 <= it <= MAX_ITEMS:
                raise LatticeError(f"item {it} outside 1..{MAX_ITEMS}")
            bits |= 1 << (it - 1)
        return cls(bits)

    @property
    def size(self) -> int:
        return self.bits.bit_count()

    @property
    def items(self) -> tuple[int, ...]:
        out, b, k = [], self.bits, 1
        while b:
            if b & 1:
                out.append(k)
            b >>= 1
            k += 1
        return tuple(out)

    def __len__(self) -> int:
        return self.size

    def __contains__(self, item: int) -> bool:
        return bool(self.bits >> (item - 1) & 1)

    def issubset(self, other: "ItemSet") -> bool:
        return self.bits & other.bits == self.bits

    def union(self, other: "ItemSet") -> "ItemSet":
        return ItemSet(self.bits | other.bits)

    def max_item(self) -> int:
        return self.bits.bit_length()

    def __repr__(self) -> str:
        return "{" + ",".join(map(str, self.items)) + "}"


class LevelIndex(NamedTuple):
    level: int
    rank: int


def overlap(a: ItemSet, b: ItemSet) -> int:
    return (a.bits & b.bits).bit_count()


def rank_set(s: ItemSet) -> LevelIndex:
    rank, m, b, pos = 0, 0, s.bits, 0
    while b:
        if b & 1:
            m += 1
            rank += math.comb(pos, m)
        b >>= 1
        pos += 1
    return LevelIndex(m, rank)


def unrank(idx: LevelIndex, N: int) -> ItemSet:
    level, rank = idx
    if not 0 <= level <= N or not 0 <= rank < level_size(N, level):
        raise LatticeError(f"invalid index {tuple(idx)} for N={N}")
    bits = 0
    pos = N - 1
    for m in range(level, 0, -1):
        while math.comb(pos, m) > rank:
            pos -= 1
        rank -= math.comb(pos, m)
        bits |= 1 << pos
        pos -= 1
    return ItemSet(bits)


def enumerate_level(N: int, i: int) -> list[ItemSet]:
    return [ItemSet(int(b)) for b in level_masks(N, i)]


@lru_cache(maxsize=None)
def _level_masks(N: int, i: int) -> np.ndarray:
    if i == 0:
        return np.zeros(1, dtype=np.int64)
    if i == N:
        return np.array([(1 << N) - 1], dtype=np.int64)
    # sets without item N sort before those with it
    lo = _level_masks(N - 1, i)
    hi = _level_masks(N - 1, i - 1) | np.int64(1 << (N - 1))
    out = np.concatenate([lo, hi])
    out.flags.writeable = False
    return out


def level_masks(N: int, i: int) -> np.ndarray:
    """All level-``i`` bit masks in rank order (read-only int64 array)."""
    if not 0 <= N <= MAX_ITEMS:
        raise LatticeError(f"N={N} outside 0..{MAX_ITEMS}")
    level_size(N, i)
    return _level_masks(N, i)


def rank_masks(masks: np.ndarray, N: int) -> np.ndarray:
    """Vectorised colex rank of equal-size masks."""
    masks = np.asarray(masks, dtype=np.int64)
    rank = np.zeros(masks.shape, dtype=np.int64)
    seen = np.zeros(masks.shape, dtype=np.int64)
    table = _binom_table(N)
    for pos in range(N):
        bit = (masks >> pos) & 1
        seen += bit
        rank += bit * table[pos, seen]
    return rank


@lru_cache(maxsize=None)
def _binom_table(N: int) -> np.ndarray:
    t = np.zeros((N + 1, N + 2), dtype=np.int64)
    for n in range(N + 1):
        for k in range(n + 1):
            t[n, k] = math.comb(n, k)
    return t


@lru_cache(maxsize=8)
def child_ranks(N: int, s: int) -> np.ndarray:
    """Ranks at level ``s`` of the ``s + 1`` one-smaller subsets of each level-(s+1) set.

    Row ``q`` lists, for the level-(s+1) set of rank ``q``, the ranks of the
    sets obtained by removing its first, second, ... member.
    """
    masks = level_masks(N, s + 1)
    k = s + 1
    table = _binom_table(N)
    pos = np.empty((len(masks), k), dtype=np.int64)
    rest = masks.copy()
    for m in range(k):
        low = rest & -rest
        pos[:, m] = np.bitwise_count(low - 1)
        rest ^= low
    # removing member m: members before keep their slot, later ones shift down by one
    keep = table[pos, np.arange(1, k + 1)]
    shift = table[pos, np.arange(0, k)]
    prefix = np.cumsum(keep, axis=1) - keep
    suffix = np.cumsum(shift[:, ::-1], axis=1)[:, ::-1] - shift
    out = (prefix + suffix).astype(np.int32 if binomial(N, s) < 2**31 else np.int64)
    out.flags.writeable = False
    return out


def up(x: np.ndarray, N: int, s: int) -> np.ndarray:
    """Level s -> s+1: each set receives the sum over its one-smaller subsets."""
    idx = child_ranks(N, s)
    return x[idx].sum(axis=1)


def down(y: np.ndarray, N: int, s: int) -> np.ndarray:
    """Level s+1 -> s: each set receives the sum over its one-larger supersets."""
    idx = child_ranks(N, s)
    size = binomial(N, s)
    flat = idx.ravel()
    if np.iscomplexobj(y):
        w = np.repeat(y, idx.shape[1])
        return np.bincount(flat, w.real, size) + 1j * np.bincount(flat, w.imag, size)
    return np.bincount(flat, np.repeat(y, idx.shape[1]), size)
