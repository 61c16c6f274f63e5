"""Multi-indices packed into Python ints, one byte per variable.

Adding two packed keys adds the exponent vectors, as long as no single
exponent reaches 256; every caller bounds total degree well below that.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

__all__ = [
    "pack",
    "unpack",
    "degree",
    "unit",
    "divides",
    "sub_indices",
    "monomials_upto",
]


def pack(exps) -> int:
    exps = tuple(exps)
    if any(e < 0 or e > 255 for e in exps):
        raise ValueError(f"exponent out of range in {exps}")
    return int.from_bytes(bytes(exps), "little")


@lru_cache(maxsize=None)
def unpack(key: int, n: int) -> tuple:
    return tuple(key.to_bytes(n, "little"))


@lru_cache(maxsize=None)
def degree(key: int) -> int:
    return sum(key.to_bytes((key.bit_length() + 7) // 8, "little"))


def unit(mu: int) -> int:
    return 1 << (8 * mu)


def divides(j: int, key: int, n: int) -> bool:
    """True if multi-index ``j`` is componentwise <= ``key``."""
    return all(x <= y for x, y in zip(unpack(j, n), unpack(key, n)))


@lru_cache(maxsize=None)
def sub_indices(key: int, n: int) -> tuple:
    """All packed ``j <= key`` componentwise."""
    ranges = [range(e + 1) for e in unpack(key, n)]
    return tuple(pack(c) for c in product(*ranges))


@lru_cache(maxsize=None)
def monomials_upto(n: int, max_degree: int) -> tuple:
    """Exponent tuples of total degree <= max_degree, graded then lex-descending."""
    def exact(d, k):
        if k == 1:
            return [(d,)]
        return [(e,) + rest for e in range(d, -1, -1) for rest in exact(d - e, k - 1)]

    return tuple(m for d in range(max_degree + 1) for m in exact(d, n))
