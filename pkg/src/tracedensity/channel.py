"""Deletion-channel simulation and the binomial smoothing kernel.

Traces are stored densely: a ``(T, n)`` uint8 matrix padded with zeros on the
right plus a vector of trace lengths. Estimators never look at traces one at
a time; they collapse them into a :class:`TraceMultiset` (distinct traces with
multiplicities) and work on that.

Randomness is split into fixed blocks of ``SAMPLE_BLOCK`` traces. Block ``b``
draws from ``SeedSequence(seed, spawn_key=(b,))``, so trace ``t`` depends only
on ``(seed, t)`` and the output is identical for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np
from scipy import stats

from .bitstring import BitString, BitsLike, as_bits
from .errors import GuardExceeded, InvalidP

__all__ = [
    "ChannelParams",
    "TraceSet",
    "TraceMultiset",
    "sample_traces",
    "trace_distribution",
    "sample_trace_counts",
    "kernel",
    "kernel_matrix",
    "SAMPLE_BLOCK",
    "DISTRIBUTION_GUARD",
]

SAMPLE_BLOCK = 1024
DISTRIBUTION_GUARD = 20


@dataclass(frozen=True)
class ChannelParams:
    """Deletion probability ``p`` and the master seed for trace generation."""

    p: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise InvalidP(f"deletion probability must lie in [0, 1), got {self.p}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def q(self) -> float:
        return self.p / (1.0 - self.p)


def _unique_rows(bits: np.ndarray, lengths: np.ndarray, weights: np.ndarray):
    """Merge identical padded traces, summing their weights."""
    n = bits.shape[1]
    if n <= 56:
        powers = np.left_shift(np.uint64(1), np.arange(n - 1, -1, -1, dtype=np.uint64))
        keys = (lengths.astype(np.uint64) << np.uint64(n)) | (bits.astype(np.uint64) @ powers if n else np.uint64(0))
        _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        uniq_bits, uniq_len = bits[first], lengths[first]
    else:
        keyed = np.concatenate([lengths[:, None], bits], axis=1).astype(np.int64)
        uniq, inverse = np.unique(keyed, axis=0, return_inverse=True)
        uniq_bits, uniq_len = uniq[:, 1:].astype(np.uint8), uniq[:, 0]
    summed = np.bincount(inverse.ravel(), weights=weights, minlength=len(uniq_len))
    return np.ascontiguousarray(uniq_bits), uniq_len.astype(np.int64), summed


def _compress(source: np.ndarray, kept: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Left-justify the kept bits of ``source`` for every row of ``kept``."""
    rows, cols = np.nonzero(kept)
    pos = np.cumsum(kept, axis=1, dtype=np.int64) - 1
    out = np.zeros(kept.shape, dtype=np.uint8)
    out[rows, pos[rows, cols]] = source[cols]
    return out, kept.sum(axis=1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class TraceMultiset:
    """Distinct traces with nonnegative weights.

    ``weights`` are trace multiplicities when built from samples (``total`` is
    then T) or exact probabilities when built from the channel law (``total``
    is 1). Every estimator is a weighted average over this set.
    """

    bits: np.ndarray
    lengths: np.ndarray
    weights: np.ndarray
    total: float
    n: int
    params: ChannelParams

    def __len__(self) -> int:
        return len(self.lengths)

    def multiset(self) -> "TraceMultiset":
        return self

    def trace(self, u: int) -> BitString:
        return BitString.from_bits(self.bits[u, : self.lengths[u]])

    def items(self) -> Iterator[tuple[BitString, float]]:
        for u in range(len(self.lengths)):
            yield self.trace(u), float(self.weights[u])


@dataclass(frozen=True, eq=False)
class TraceSet:
    """An ordered collection of traces of a length-``n`` source."""

    bits: np.ndarray
    lengths: np.ndarray
    n: int
    params: ChannelParams

    @classmethod
    def from_traces(cls, traces: Sequence[BitsLike], n: int, params: ChannelParams) -> "TraceSet":
        traces = [as_bits(t) for t in traces]
        bits = np.zeros((len(traces), n), dtype=np.uint8)
        lengths = np.zeros(len(traces), dtype=np.int64)
        for row, t in enumerate(traces):
            if len(t) > n:
                raise ValueError(f"trace {row} longer than source length {n}")
            bits[row, : len(t)] = t.to_array()
            lengths[row] = len(t)
        return cls(bits, lengths, n, params)

    @property
    def count(self) -> int:
        return len(self.lengths)

    def __len__(self) -> int:
        return len(self.lengths)

    def __getitem__(self, t: int) -> BitString:
        return BitString.from_bits(self.bits[t, : self.lengths[t]])

    def __iter__(self) -> Iterator[BitString]:
        for t in range(len(self.lengths)):
            yield self[t]

    @property
    def traces(self) -> list[BitString]:
        return list(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TraceSet):
            return NotImplemented
        return (
            self.n == other.n
            and self.params == other.params
            and np.array_equal(self.lengths, other.lengths)
            and np.array_equal(self.bits, other.bits)
        )

    @cached_property
    def _collapsed(self) -> TraceMultiset:
        bits, lengths, weights = _unique_rows(self.bits, self.lengths, np.ones(len(self.lengths)))
        return TraceMultiset(bits, lengths, weights, float(len(self.lengths)), self.n, self.params)

    def multiset(self) -> TraceMultiset:
        """Collapse identical traces; rows come out sorted by (length, bits)."""
        return self._collapsed


def _sample_block(source: np.ndarray, p: float, seed: int, block: int, size: int):
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    kept = rng.random((size, len(source))) >= p
    return _compress(source, kept)


def sample_traces(s: BitsLike, params: ChannelParams, T: int, workers: int = 1) -> TraceSet:
    """Pass ``s`` through the deletion channel ``T`` times.

    Parameters
    ----------
    s : BitString or str
        Source string.
    params : ChannelParams
        Deletion probability and master seed.
    T : int
        Number of traces, at least 1.
    workers : int
        Thread count. The result does not depend on it.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    s = as_bits(s)
    source = s.to_array()
    blocks = [(b, min(SAMPLE_BLOCK, T - b * SAMPLE_BLOCK)) for b in range(math.ceil(T / SAMPLE_BLOCK))]

    def run(job):
        return _sample_block(source, params.p, params.seed, *job)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(job) for job in blocks]
    bits = np.concatenate([b for b, _ in parts], axis=0)
    lengths = np.concatenate([l for _, l in parts])
    return TraceSet(bits, lengths, len(s), params)


def trace_distribution(s: BitsLike, p: float) -> TraceMultiset:
    """Exact law of a single trace, by enumerating all ``2**n`` deletion masks.

    Weights are the probabilities ``p**deleted * (1-p)**kept`` summed over the
    masks producing each distinct trace; ``total`` is 1.
    """
    s = as_bits(s)
    n = len(s)
    if n > DISTRIBUTION_GUARD:
        raise GuardExceeded(f"n={n} exceeds the mask-enumeration guard {DISTRIBUTION_GUARD}")
    params = ChannelParams(p)
    masks = np.arange(1 << n, dtype=np.int64)
    kept = ((masks[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(bool)
    bits, lengths = _compress(s.to_array(), kept)
    probs = (1.0 - p) ** lengths * p ** (n - lengths)
    bits, lengths, weights = _unique_rows(bits, lengths, probs)
    keep = weights > 0
    return TraceMultiset(bits[keep], lengths[keep], weights[keep], 1.0, n, params)


def sample_trace_counts(s: BitsLike, params: ChannelParams, T: int) -> TraceMultiset:
    """Draw ``T`` i.i.d. traces directly in multiset form.

    The vector of multiplicities of ``T`` i.i.d. draws from the exact trace
    law is multinomial, so it is sampled in one shot. Cost no longer grows with
    ``T``, which makes budgets of 10^8 traces practical for ``n <= 20``.
    The draws differ from :func:`sample_traces` for the same seed.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    dist = trace_distribution(s, params.p)
    rng = np.random.default_rng(np.random.SeedSequence(params.seed))
    probs = dist.weights / dist.weights.sum()
    counts = rng.multinomial(T, probs)
    keep = counts > 0
    return TraceMultiset(
        dist.bits[keep], dist.lengths[keep], counts[keep].astype(np.float64), float(T), dist.n, params
    )


def kernel(i: int, j: int, p: float) -> float:
    """Probability that bit ``j`` of the source, if kept, lands at trace position ``i``.

    ``C(j-1, i-1) (1-p)**(i-1) p**(j-i)``, evaluated through log-gamma.
    """
    if i < 1 or j < 1:
        raise ValueError("positions are 1-based")
    if i > j:
        return 0.0
    if i == j:
        return (1.0 - p) ** (i - 1)
    if p == 0.0:
        return 0.0
    log_h = (
        math.lgamma(j) - math.lgamma(i) - math.lgamma(j - i + 1)
        + (i - 1) * math.log1p(-p) + (j - i) * math.log(p)
    )
    return math.exp(log_h)


def kernel_matrix(n: int, k: int, p: float) -> np.ndarray:
    """Upper-triangular ``F`` with ``F[i, j] = h(i+1, j+1)``, size ``n-k+1``."""
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= n, got k={k}, n={n}")
    m = n - k + 1
    idx = np.arange(m)
    # binom.pmf(i, j, 1-p) is zero for i > j, giving the triangle for free
    return stats.binom.pmf(idx[:, None], idx[None, :], 1.0 - p)
