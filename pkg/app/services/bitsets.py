"""Subsets of a ground set ``{0, ..., n-1}`` stored as Python ints."""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Iterator, List

import numpy as np


def full(size: int) -> int:
    return (1 << size) - 1


def popcount(mask: int) -> int:
    return mask.bit_count()


def mask_of(elements: Iterable[int]) -> int:
    mask = 0
    for element in elements:
        if element < 0:
            raise ValueError(f"negative element index {element}")
        mask |= 1 << element
    return mask


def bits(mask: int) -> Iterator[int]:
    """Yield the set elements of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_list(mask: int) -> List[int]:
    return list(bits(mask))


def submasks(mask: int) -> Iterator[int]:
    """Every subset of ``mask``, including 0 and ``mask`` itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def subsets_of_size(mask: int, k: int) -> Iterator[int]:
    for combo in combinations(to_list(mask), k):
        yield mask_of(combo)


def lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


def highest(mask: int) -> int:
    return mask.bit_length() - 1


def popcount_table(size: int) -> np.ndarray:
    """Popcount of every subset of a ``size`` element ground set."""
    table = np.zeros(1 << size, dtype=np.uint8)
    for bit in range(size):
        span = 1 << bit
        table[span : 2 * span] = table[:span] + 1
    return table
