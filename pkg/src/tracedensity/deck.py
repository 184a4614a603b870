"""k-subword deck estimation.

The deck estimator is the density-map estimator summed over positions:
every embedding of ``x`` into a trace contributes ``(-q)^gaps``, wherever it
starts. The truncated variant drops substrings longer than ``k + floor(d)``
for the truncation depth ``d``. A gapped-pattern ("wildcard") form of the
same quantity is kept as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np
from scipy.special import comb

from .bitstring import BitString, BitsLike, as_bits
from .channel import TraceMultiset, TraceSet
from .density import _check_p, _interior_binom, _multiset, _scan, kmer_code, kmer_from_code
from .errors import GuardExceeded, InvalidP, KTooSmall, ShapeMismatch

__all__ = [
    "Deck",
    "estimate_occurrence_mean",
    "estimate_deck",
    "truncation_depth",
    "deck_from_occurrence_means",
    "wildcard_deck_estimate",
    "WILDCARD_GUARD",
]

WILDCARD_GUARD = 10**6

Traces = Union[TraceSet, TraceMultiset]


@dataclass(frozen=True, eq=False)
class Deck:
    """k-mer occurrence counts, indexed by integer k-mer code.

    ``raw`` holds real-valued estimates (equal to the counts for exact decks);
    ``counts`` holds the nonnegative integer counts.
    """

    k: int
    raw: np.ndarray
    counts: np.ndarray

    @classmethod
    def from_raw(cls, k: int, raw: np.ndarray) -> "Deck":
        counts = np.maximum(0, np.rint(raw)).astype(np.int64)
        return cls(k, np.asarray(raw, dtype=np.float64), counts)

    def __getitem__(self, x: Union[BitsLike, int]) -> int:
        return int(self.counts[kmer_code(x, self.k)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Deck):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.counts, other.counts)

    def __hash__(self):
        return hash((self.k, self.counts.tobytes()))

    def as_dict(self) -> dict[BitString, int]:
        return {kmer_from_code(c, self.k): int(v) for c, v in enumerate(self.counts) if v}

    def total(self) -> int:
        return int(self.counts.sum())


def estimate_occurrence_mean(traces: Traces, x: BitsLike) -> float:
    """Mean number of (overlapping) occurrences of ``x`` per trace."""
    ms = _multiset(traces)
    xa = as_bits(x).to_array()
    k = len(xa)
    width = ms.bits.shape[1]
    if k == 0 or k > width:
        return 0.0
    span = width - k + 1
    hit = np.ones((len(ms), span), dtype=bool)
    for r in range(k):
        hit &= ms.bits[:, r:r + span] == xa[r]
    hit &= np.arange(span)[None, :] + k <= ms.lengths[:, None]
    return float(ms.weights @ hit.sum(axis=1) / ms.total)


def truncation_depth(k: float, n: int, p: float) -> float:
    """Truncation depth ``d = e^2/(1/2-p) * (k ln(e^2/(1/2-p)) + ln n)``.

    Natural logarithms throughout.
    """
    if not 0.0 <= p < 0.5:
        raise InvalidP(f"truncation depth needs p < 1/2, got {p}")
    base = math.e**2 / (0.5 - p)
    return base * (k * math.log(base) + math.log(n))


def estimate_deck(traces: Traces, k: int, p: float, mode: str = "full", workers: int = 1) -> Deck:
    """Estimate the k-subword deck and round it to counts.

    Parameters
    ----------
    traces : TraceSet or TraceMultiset
    k : int
        k-mer length, at least 2.
    p : float
        Deletion probability.
    mode : {"full", "truncated"}
        ``"truncated"`` ignores trace substrings longer than
        ``k + floor(truncation_depth(k, n, p))``.
    workers : int
        Thread count; does not change the result.
    """
    if k < 2:
        raise KTooSmall("k must be at least 2")
    if mode not in ("full", "truncated"):
        raise ValueError(f"unknown mode {mode!r}")
    _check_p(p)
    ms = _multiset(traces)
    if k > ms.n:
        raise ShapeMismatch(f"k={k} exceeds source length n={ms.n}")
    max_len = None
    if mode == "truncated":
        max_len = k + math.floor(truncation_depth(k, ms.n, p))
    sums = _scan(ms, k, p, max_len=max_len, workers=workers)
    raw = sums.sum(axis=1) / (ms.total * (1.0 - p) ** k)
    return Deck.from_raw(k, raw)


def deck_from_occurrence_means(means: Mapping[str, float], k: int, p: float, max_len: int = None) -> np.ndarray:
    """Evaluate the deck inversion formula on expected occurrence counts.

    ``means[y]`` is the expected number of occurrences of ``y`` in a trace.
    Returns the raw (unrounded) value for every k-mer code. ``max_len`` caps
    ``|y|`` for the truncated form.
    """
    if k < 2:
        raise KTooSmall("k must be at least 2")
    q = p / (1.0 - p)
    m = k - 2
    raw = np.zeros(1 << k)
    for ys, mean in means.items():
        ell = len(ys)
        if ell < k or mean == 0.0 or (max_len is not None and ell > max_len):
            continue
        factor = mean * (-q) ** (ell - k) if ell > k else mean
        a, b = int(ys[0]), int(ys[-1])
        for z in range(1 << m):
            xs = ys[0] + (format(z, f"0{m}b") if m else "") + ys[-1]
            c = _interior_binom(ys, xs)
            if c:
                raw[(a << (k - 1)) | (z << 1) | b] += c * factor
    return raw / (1.0 - p) ** k


def _gap_vectors(parts: int, budget: int):
    """All nonnegative integer vectors of length ``parts`` with sum at most ``budget``."""
    if parts == 0:
        yield ()
        return
    for first in range(budget + 1):
        for rest in _gap_vectors(parts - 1, budget - first):
            yield (first,) + rest


def wildcard_deck_estimate(traces: Traces, x: BitsLike, p: float, dmax: int) -> float:
    """Deck estimate for ``x`` from gapped-pattern counts.

    Sums ``E[#(x1 *^a1 x2 ... *^a(k-1) xk)] (-q)^|a|`` over gap vectors with
    ``|a| <= dmax`` and divides by ``(1-p)^k``. Counting is exhaustive per
    pattern, so the number of gap vectors is guarded.
    """
    xa = as_bits(x).to_array()
    k = len(xa)
    if k < 2:
        raise KTooSmall("k must be at least 2")
    if dmax < 0:
        raise ValueError("dmax must be nonnegative")
    n_patterns = comb(dmax + k - 1, k - 1, exact=True)
    if n_patterns > WILDCARD_GUARD:
        raise GuardExceeded(f"{n_patterns} gap vectors exceed the guard {WILDCARD_GUARD}")
    _check_p(p)
    ms = _multiset(traces)
    q = p / (1.0 - p)
    width = ms.bits.shape[1]
    total = 0.0
    for gaps in _gap_vectors(k - 1, dmax):
        offsets = np.concatenate([[0], np.cumsum(np.asarray(gaps, dtype=np.int64) + 1)])
        span = int(offsets[-1]) + 1
        if span > width:
            continue
        starts = width - span + 1
        hit = np.arange(starts)[None, :] + span <= ms.lengths[:, None]
        for r, off in enumerate(offsets):
            hit &= ms.bits[:, off:off + starts] == xa[r]
        expected = ms.weights @ hit.sum(axis=1) / ms.total
        total += expected * (-q) ** sum(gaps)
    return total / (1.0 - p) ** k
