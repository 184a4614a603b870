"""Binary strings with 1-based, negative-aware indexing and string binomials.

Positions follow the convention used throughout the package: the first bit
is position 1, and a negative position ``-i`` names the i-th bit from the
right end. ``slice(s, i, j)`` is inclusive on both ends.

>>> s = parse_bits("10101")
>>> str(s.slice(1, 3)), str(s.slice(2, -2))
('101', '010')
>>> subseq_count("1011", "101")
2
"""

from __future__ import annotations

from functools import total_ordering
from typing import Iterator, Union

import numpy as np

from .errors import (
    EndpointMismatch,
    GuardExceeded,
    InvalidCharacter,
    KTooSmall,
    OutOfRange,
)

__all__ = [
    "BitString",
    "BitsLike",
    "parse_bits",
    "as_bits",
    "slice_bits",
    "subseq_count",
    "interior_count",
    "weighted_interior_count",
    "enumerate_supersequences",
    "supersequence_enumerations",
    "SUPERSEQUENCE_GUARD",
]

SUPERSEQUENCE_GUARD = 20

# bumped by enumerate_supersequences; the estimators must never touch it
_enumerations = 0


@total_ordering
class BitString:
    """An immutable packed binary string.

    The bits are held in a Python integer (most significant bit first), so
    strings of any length are supported and hashing is cheap.

    Parameters
    ----------
    value : int
        Integer whose ``length``-bit big-endian representation is the string.
    length : int
        Number of bits; leading zeros are significant.
    """

    __slots__ = ("_value", "_length")

    def __init__(self, value: int = 0, length: int = 0):
        if length < 0:
            raise ValueError("length must be nonnegative")
        if value < 0 or value >> length:
            raise ValueError(f"value {value} does not fit in {length} bits")
        self._value = value
        self._length = length

    @classmethod
    def from_text(cls, text: str) -> "BitString":
        bad = set(text) - {"0", "1"}
        if bad:
            raise InvalidCharacter(f"invalid character(s) {sorted(bad)!r} in bit string {text!r}")
        return cls(int(text, 2) if text else 0, len(text))

    @classmethod
    def from_bits(cls, bits) -> "BitString":
        value = 0
        n = 0
        for b in bits:
            value = (value << 1) | (1 if b else 0)
            n += 1
        return cls(value, n)

    @property
    def value(self) -> int:
        return self._value

    @property
    def text(self) -> str:
        return format(self._value, f"0{self._length}b") if self._length else ""

    def __len__(self) -> int:
        return self._length

    def __str__(self) -> str:
        return self.text

    def __repr__(self) -> str:
        return f"BitString('{self.text}')"

    def __iter__(self) -> Iterator[int]:
        n = self._length
        for shift in range(n - 1, -1, -1):
            yield (self._value >> shift) & 1

    def __eq__(self, other) -> bool:
        if isinstance(other, BitString):
            return self._length == other._length and self._value == other._value
        if isinstance(other, str):
            return self.text == other
        return NotImplemented

    def __lt__(self, other) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self.text < other.text

    def __hash__(self) -> int:
        return hash((self._value, self._length))

    def __add__(self, other: "BitString") -> "BitString":
        other = as_bits(other)
        return BitString((self._value << other._length) | other._value, self._length + other._length)

    def _resolve(self, i: int) -> int:
        return i if i > 0 else self._length + 1 + i

    def bit(self, i: int) -> int:
        """Bit at 1-based position ``i``; negative ``i`` counts from the right."""
        pos = self._resolve(i) if i != 0 else 0
        if not 1 <= pos <= self._length:
            raise OutOfRange(f"position {i} out of range for length {self._length}")
        return (self._value >> (self._length - pos)) & 1

    @property
    def first(self) -> int:
        return self.bit(1)

    @property
    def last(self) -> int:
        return self.bit(-1)

    def slice(self, i: int, j: int) -> "BitString":
        """Inclusive substring ``s[i:j]`` under 1-based, negative-aware indexing."""
        if i == 0 or j == 0:
            raise OutOfRange("position 0 does not exist under 1-based indexing")
        a, b = self._resolve(i), self._resolve(j)
        if not (1 <= a <= b + 1 <= self._length + 1):
            raise OutOfRange(f"slice [{i}:{j}] invalid for length {self._length}")
        width = b - a + 1
        if width == 0:
            return BitString()
        shifted = self._value >> (self._length - b)
        return BitString(shifted & ((1 << width) - 1), width)

    def interior(self) -> "BitString":
        """``s[2:-2]``; the interior of a 2-mer is empty."""
        if self._length < 2:
            raise KTooSmall("interior needs at least two bits")
        return self.slice(2, -2)

    def to_array(self) -> np.ndarray:
        return np.fromiter(self, dtype=np.uint8, count=self._length)


BitsLike = Union[BitString, str]


def parse_bits(text: str) -> BitString:
    """Parse nonempty ASCII ``0``/``1`` text into a :class:`BitString`."""
    if not text:
        raise InvalidCharacter("empty bit string")
    return BitString.from_text(text)


def as_bits(x: BitsLike) -> BitString:
    if isinstance(x, BitString):
        return x
    if isinstance(x, str):
        return BitString.from_text(x)
    raise TypeError(f"expected BitString or str, got {type(x).__name__}")


def _text(x: BitsLike) -> str:
    return x.text if isinstance(x, BitString) else as_bits(x).text


def slice_bits(s: BitsLike, i: int, j: int) -> BitString:
    return as_bits(s).slice(i, j)


def subseq_count(y: BitsLike, x: BitsLike) -> int:
    """Number of ways to delete ``|y| - |x|`` bits from ``y`` to obtain ``x``.

    Exact (arbitrary precision) O(|y||x|) dynamic program. The empty string
    embeds exactly once into anything.
    """
    ys, xs = _text(y), _text(x)
    m = len(xs)
    if m > len(ys):
        return 0
    # ways[j]: embeddings of xs[:j] into the prefix of ys read so far
    ways = [1] + [0] * m
    for c in ys:
        for j in range(m, 0, -1):
            if xs[j - 1] == c:
                ways[j] += ways[j - 1]
    return ways[m]


def _check_endpoints(ys: str, xs: str) -> None:
    if len(xs) < 2:
        raise KTooSmall(f"k-mer length must be at least 2, got {len(xs)}")
    if len(ys) < len(xs):
        raise ValueError(f"|y|={len(ys)} shorter than |x|={len(xs)}")
    if ys[0] != xs[0] or ys[-1] != xs[-1]:
        raise EndpointMismatch(f"{ys!r} and {xs!r} differ in their first or last bit")


def interior_count(y: BitsLike, x: BitsLike) -> int:
    """``binom(y[2:-2], x[2:-2])`` for endpoint-matched ``y`` and ``x``."""
    ys, xs = _text(y), _text(x)
    _check_endpoints(ys, xs)
    return subseq_count(ys[1:-1], xs[1:-1])


def weighted_interior_count(y: BitsLike, x: BitsLike, q: float) -> float:
    """Interior embedding count of ``x`` in ``y`` times ``q**(|y| - |x|)``.

    Every bit of ``y``'s interior that is skipped multiplies the running
    count by ``q``, so the result stays bounded for ``q < 1`` even when the
    integer count is astronomically large.
    """
    if q < 0:
        raise ValueError("q must be nonnegative")
    ys, xs = _text(y), _text(x)
    _check_endpoints(ys, xs)
    yi, xi = ys[1:-1], xs[1:-1]
    m = len(xi)
    dp = [1.0] + [0.0] * m
    for c in yi:
        for j in range(m, 0, -1):
            dp[j] = q * dp[j] + (dp[j - 1] if xi[j - 1] == c else 0.0)
        dp[0] *= q
    return dp[m]


def enumerate_supersequences(x: BitsLike, length: int) -> set[BitString]:
    """All length-``length`` supersequences of ``x`` sharing its first and last bit.

    Exhaustive over ``2**length`` candidates, so ``length`` is capped at
    ``SUPERSEQUENCE_GUARD``. Test-scale helper only.
    """
    global _enumerations
    xb = as_bits(x)
    xs = xb.text
    if len(xs) < 2:
        raise KTooSmall("x must have at least two bits")
    if length < len(xs):
        raise ValueError(f"length {length} shorter than |x|={len(xs)}")
    if length > SUPERSEQUENCE_GUARD:
        raise GuardExceeded(f"length {length} exceeds enumeration guard {SUPERSEQUENCE_GUARD}")
    _enumerations += 1
    out = set()
    for v in range(1 << length):
        ys = format(v, f"0{length}b")
        if ys[0] == xs[0] and ys[-1] == xs[-1] and subseq_count(ys, xs) > 0:
            out.add(BitString(v, length))
    return out


def supersequence_enumerations() -> int:
    """How many times :func:`enumerate_supersequences` has run in this process."""
    return _enumerations
