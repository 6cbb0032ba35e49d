"""Indexing formulas shared by the owner and the server.

Every function here is pure: alphabet values, the position-weighted KI sum,
decimal digit sums, the truncated-digest bucket key and the Ver-Key pair.
"""

from __future__ import annotations

import hashlib

from config import DIGEST_ALGORITHM, INDEX_BITS, MAX_KEYWORD_LENGTH
from ghsed.errors import DomainError, ParameterError
from models import VerKey

ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"
_CHAR_VALUES = {c: i for i, c in enumerate(ALPHABET, start=1)}


class Keyword(str):
    """A normalized token: 1..64 characters from ``ALPHABET``."""

    __slots__ = ()

    def __new__(cls, text: str) -> Keyword:
        if isinstance(text, Keyword):
            return text
        if not 1 <= len(text) <= MAX_KEYWORD_LENGTH:
            raise DomainError(
                f"keyword length {len(text)} outside 1..{MAX_KEYWORD_LENGTH}"
            )
        for c in text:
            if c not in _CHAR_VALUES:
                raise DomainError(f"character {c!r} outside the keyword alphabet")
        return super().__new__(cls, text)


def char_value(c: str) -> int:
    """a..z -> 1..26, 0..9 -> 27..36."""
    try:
        return _CHAR_VALUES[c]
    except KeyError:
        raise DomainError(f"character {c!r} outside the keyword alphabet") from None


def ki(w: str) -> int:
    """Sum of char_value(w[j]) * j with j counted from 1."""
    w = Keyword(w)
    return sum(_CHAR_VALUES[c] * j for j, c in enumerate(w, start=1))


def ki_upper_bound(length: int) -> int:
    return len(ALPHABET) * length * (length + 1) // 2


def digit_sum(x: int) -> int:
    if x < 0:
        raise ParameterError("digit_sum is defined for non-negative integers")
    return sum(map(int, str(x)))


def digest_algorithm_id(index_bits: int = INDEX_BITS) -> str:
    """Identifier written into HT headers and snapshots."""
    if index_bits == 64:
        return DIGEST_ALGORITHM
    return f"{DIGEST_ALGORITHM}t{index_bits}"


def index_bits_of(algorithm_id: str) -> int:
    if algorithm_id == DIGEST_ALGORITHM:
        return 64
    prefix = f"{DIGEST_ALGORITHM}t"
    if algorithm_id.startswith(prefix) and algorithm_id[len(prefix):].isdigit():
        bits = int(algorithm_id[len(prefix):])
        if 1 <= bits < 64:
            return bits
    raise ParameterError(f"unknown digest algorithm id {algorithm_id!r}")


def index_of(w: str, index_bits: int = INDEX_BITS) -> int:
    """First 8 bytes (big-endian) of SHA-256(w); narrower widths keep the top bits."""
    if not 1 <= index_bits <= 64:
        raise ParameterError(f"index_bits must be in 1..64, got {index_bits}")
    w = Keyword(w)
    digest = hashlib.new(DIGEST_ALGORITHM, w.encode("utf-8")).digest()
    value = int.from_bytes(digest[:8], "big")
    return value >> (64 - index_bits)


def make_ver_key(ki_value: int, s: int) -> VerKey:
    return VerKey(ki=ki_value, digit_sum=s)
