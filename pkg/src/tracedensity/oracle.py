"""Brute-force ground truth for small sources.

Everything here is exhaustive and slow on purpose: trace statistics come
from enumerating all ``2**n`` deletion masks, density maps from the defining
kernel sum, decks from a direct scan, and expansion coefficients from their
defining recursion. These are the references the estimators are tested
against.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bitstring import BitString, BitsLike, as_bits, subseq_count
from .channel import kernel, trace_distribution
from .deck import Deck
from .density import DensityMap
from .errors import EndpointMismatch, GuardExceeded, KTooSmall

__all__ = [
    "ExactStats",
    "ORACLE_GUARD",
    "exact_statistics",
    "exact_density_map",
    "exact_deck",
    "indicator_vectors",
    "coefficient_by_recursion",
    "subsequence_identity_sum",
]

ORACLE_GUARD = 16


@dataclass(frozen=True)
class ExactStats:
    """Exact trace statistics of one source under one deletion probability.

    ``position_probs[(y, i)]`` is the probability that ``y`` occupies trace
    positions ``i..i+|y|-1``; ``occurrence_means[y]`` is the expected number
    of (possibly overlapping) occurrences of ``y`` in a trace. Only strings
    with ``|y| >= k`` that some mask actually produces are stored.
    """

    n: int
    p: float
    k: int
    position_probs: dict
    occurrence_means: dict

    def position_prob(self, y: BitsLike, i: int) -> float:
        return self.position_probs.get((as_bits(y).text, i), 0.0)

    def occurrence_mean(self, y: BitsLike) -> float:
        return self.occurrence_means.get(as_bits(y).text, 0.0)


def exact_statistics(s: BitsLike, p: float, k: int) -> ExactStats:
    s = as_bits(s)
    n = len(s)
    if n > ORACLE_GUARD:
        raise GuardExceeded(f"n={n} exceeds the oracle guard {ORACLE_GUARD}")
    if not 2 <= k <= n:
        raise KTooSmall(f"need 2 <= k <= n, got k={k}")
    dist = trace_distribution(s, p)
    probs: dict = {}
    means: dict = {}
    for trace, w in dist.items():
        ts = trace.text
        L = len(ts)
        for start in range(L - k + 1):
            for end in range(start + k, L + 1):
                y = ts[start:end]
                key = (y, start + 1)
                probs[key] = probs.get(key, 0.0) + w
                means[y] = means.get(y, 0.0) + w
    return ExactStats(n, p, k, probs, means)


def indicator_vectors(s: BitsLike, k: int) -> np.ndarray:
    """``I[x, j-1] = 1`` iff the k-mer with code ``x`` starts at position ``j`` of ``s``."""
    st = as_bits(s).text
    n = len(st)
    if not 2 <= k <= n:
        raise KTooSmall(f"need 2 <= k <= n, got k={k}")
    ind = np.zeros((1 << k, n - k + 1))
    for j in range(n - k + 1):
        ind[int(st[j:j + k], 2), j] = 1.0
    return ind


def exact_density_map(s: BitsLike, k: int, p: float) -> DensityMap:
    """Exact density map by summing the kernel over every occurrence of every k-mer."""
    st = as_bits(s).text
    n = len(st)
    if not 2 <= k <= n:
        raise KTooSmall(f"need 2 <= k <= n, got k={k}")
    width = n - k + 1
    values = np.zeros((1 << k, width))
    for j in range(1, width + 1):
        code = int(st[j - 1:j - 1 + k], 2)
        for i in range(1, j + 1):
            values[code, i - 1] += kernel(i, j, p)
    return DensityMap(k, n, values)


def exact_deck(s: BitsLike, k: int) -> Deck:
    st = as_bits(s).text
    n = len(st)
    if not 2 <= k <= n:
        raise KTooSmall(f"need 2 <= k <= n, got k={k}")
    counts = np.zeros(1 << k, dtype=np.int64)
    for j in range(n - k + 1):
        counts[int(st[j:j + k], 2)] += 1
    return Deck(k, counts.astype(np.float64), counts)


def _endpoint_matched(x: str, length: int):
    """All length-``length`` strings with ``x``'s end bits that contain ``x`` as a subsequence."""
    m = length - 2
    for mid in itertools.product("01", repeat=m):
        y = x[0] + "".join(mid) + x[-1]
        if subseq_count(y, x):
            yield y


@lru_cache(maxsize=None)
def _recursive(x: str, y: str) -> int:
    k, ell = len(x), len(y)
    total = subseq_count(y[1:-1], x[1:-1])
    for j in range(k + 1, ell):
        for z in _endpoint_matched(x, j):
            total -= _recursive(x, z) * subseq_count(y[1:-1], z[1:-1])
    return total


def coefficient_by_recursion(x: BitsLike, y: BitsLike) -> int:
    """Expansion coefficient of ``y`` computed from its defining recursion.

    ``a(x, y) = binom'(y, x) - sum_{k < |z| < |y|} a(x, z) binom'(y, z)`` over
    endpoint-matched supersequences ``z`` of ``x``. Exponential; for checking
    the closed form on short strings only.
    """
    xs, ys = as_bits(x).text, as_bits(y).text
    if len(xs) < 2:
        raise KTooSmall("x must have at least two bits")
    if len(ys) <= len(xs):
        raise ValueError("y must be strictly longer than x")
    if xs[0] != ys[0] or xs[-1] != ys[-1]:
        raise EndpointMismatch(f"{ys!r} is not endpoint-matched to {xs!r}")
    if len(ys) > 16:
        raise GuardExceeded("recursion is exponential in |y|; keep |y| <= 16")
    return _recursive(xs, ys)


def subsequence_identity_sum(f: BitsLike, g: BitsLike) -> int:
    """``sum_h (-1)^(|g|+|h|) binom(f, h) binom(h, g)`` over all binary ``h``.

    Only ``|g| <= |h| <= |f|`` can contribute. The sum is 1 when ``f == g``
    and 0 otherwise.
    """
    fs, gs = as_bits(f).text, as_bits(g).text
    total = 0
    for length in range(len(gs), len(fs) + 1):
        sign = -1 if (len(gs) + length) % 2 else 1
        for h in itertools.product("01", repeat=length):
            hs = "".join(h)
            total += sign * subseq_count(fs, hs) * subseq_count(hs, gs)
    return total
