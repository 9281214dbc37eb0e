"""Bit-set helpers.

Action sets and process sets are plain Python ints used as bit masks over
the dense index universe of a system.  These helpers keep the call sites
readable.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from functools import lru_cache


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bits(mask: int) -> list[int]:
    return list(iter_bits(mask))


@lru_cache(maxsize=1 << 16)
def bit_tuple(mask: int) -> tuple[int, ...]:
    """Cached ``tuple(iter_bits(mask))`` for masks that recur in hot loops."""
    return tuple(iter_bits(mask))


def popcount(mask: int) -> int:
    return mask.bit_count()


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0
