"""Unbiased estimation of k-mer density maps from traces.

For a k-mer ``x`` and trace position ``i`` the estimator is

    K^[x, i] = (1-p)^-k * mean_t  sum_y (-q)^(|y|-k) * binom'(y, x)

where ``y`` runs over every substring of trace ``t`` that starts at ``i`` and
shares ``x``'s first and last bit, ``q = p/(1-p)``, and ``binom'`` counts
embeddings of ``x``'s interior into ``y``'s interior. Summing
``binom'(y, x) (-q)^(|y|-k)`` over all such ``y`` is the same as summing
``(-q)^gaps`` over all embeddings of ``x`` into the trace whose first bit lands
on ``i``, which is what :func:`estimate_density_map` computes: a backward
dynamic program over suffixes of every k-mer at once, O(L * 2^k) per distinct
trace. No supersequence set is ever enumerated.

:func:`estimate_density_entry` keeps the per-substring form and is used to
cross-check the fast path.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping, Optional, Union

import numpy as np

from .bitstring import BitString, BitsLike, as_bits, subseq_count, weighted_interior_count
from .channel import TraceMultiset, TraceSet
from .errors import EmptyTraceSet, EndpointMismatch, HighDeletionWarning, KTooSmall, InvalidP, ShapeMismatch

__all__ = [
    "DensityMap",
    "estimate_position_prob",
    "expansion_coefficient",
    "estimate_density_entry",
    "estimate_density_map",
    "density_from_position_probs",
    "kmer_code",
    "kmer_from_code",
]

Traces = Union[TraceSet, TraceMultiset]


def kmer_code(x: Union[BitsLike, int], k: int) -> int:
    if isinstance(x, (int, np.integer)):
        code = int(x)
        if not 0 <= code < 1 << k:
            raise ValueError(f"code {code} is not a {k}-mer")
        return code
    x = as_bits(x)
    if len(x) != k:
        raise ShapeMismatch(f"expected a {k}-mer, got {x.text!r}")
    return x.value


def kmer_from_code(code: int, k: int) -> BitString:
    return BitString(int(code), k)


@dataclass(frozen=True, eq=False)
class DensityMap:
    """Per-k-mer density vectors over positions ``1..n-k+1``.

    ``values[code, i-1]`` is the entry for the k-mer whose integer encoding is
    ``code`` (most significant bit first) at 1-based position ``i``.
    """

    k: int
    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (1 << self.k, self.n - self.k + 1):
            raise ShapeMismatch(f"values shape {self.values.shape} does not match k={self.k}, n={self.n}")

    @property
    def width(self) -> int:
        return self.n - self.k + 1

    def __getitem__(self, x: Union[BitsLike, int]) -> np.ndarray:
        return self.values[kmer_code(x, self.k)]

    def entry(self, x: Union[BitsLike, int], i: int) -> float:
        return float(self.values[kmer_code(x, self.k), i - 1])

    @property
    def entries(self) -> dict[BitString, np.ndarray]:
        return {kmer_from_code(c, self.k): self.values[c] for c in range(1 << self.k)}

    def total(self) -> float:
        return float(self.values.sum())

    def same_shape(self, other: "DensityMap") -> bool:
        return self.k == other.k and self.n == other.n


def _check_p(p: float) -> None:
    if not 0.0 <= p < 1.0:
        raise InvalidP(f"p must lie in [0, 1), got {p}")
    if p >= 0.5:
        warnings.warn(f"p={p} >= 0.5: the estimator is still unbiased but its variance is unbounded",
                      HighDeletionWarning, stacklevel=3)


def _multiset(traces: Traces) -> TraceMultiset:
    ms = traces.multiset()
    if len(ms) == 0 or ms.total <= 0:
        raise EmptyTraceSet("no traces to estimate from")
    return ms


def estimate_position_prob(traces: Traces, x: BitsLike, i: int) -> float:
    """Fraction of traces whose substring starting at position ``i`` is ``x``."""
    if i < 1:
        raise ValueError("positions are 1-based")
    ms = _multiset(traces)
    x = as_bits(x)
    k = len(x)
    end = i + k - 1
    if end > ms.bits.shape[1]:
        return 0.0
    hit = (ms.lengths >= end) & np.all(ms.bits[:, i - 1:end] == x.to_array(), axis=1)
    return float(ms.weights[hit].sum() / ms.total)


def expansion_coefficient(x: BitsLike, y: BitsLike) -> int:
    """Closed-form coefficient of the ``y`` term when expanding the recursion for ``x``.

    Equals ``(-1)**(|y|-|x|+1) * binom'(y, x)``.
    """
    xs, ys = as_bits(x).text, as_bits(y).text
    if len(xs) < 2:
        raise KTooSmall("x must have at least two bits")
    if len(ys) <= len(xs):
        raise ValueError("y must be strictly longer than x")
    if xs[0] != ys[0] or xs[-1] != ys[-1]:
        raise EndpointMismatch(f"{ys!r} is not endpoint-matched to {xs!r}")
    sign = -1 if (len(ys) - len(xs)) % 2 == 0 else 1
    return sign * subseq_count(ys[1:-1], xs[1:-1])


def estimate_density_entry(traces: Traces, x: BitsLike, i: int, p: float) -> float:
    """Estimate a single density-map entry by scanning observed substrings.

    For every distinct trace, each substring ``y`` starting at ``i`` with the
    same end bits as ``x`` contributes ``(-1)^(|y|-k) * binom'(y, x) q^(|y|-k)``
    times the trace's multiplicity.
    """
    if i < 1:
        raise ValueError("positions are 1-based")
    _check_p(p)
    ms = _multiset(traces)
    xs = as_bits(x).text
    k = len(xs)
    if k < 2:
        raise KTooSmall("k must be at least 2")
    q = p / (1.0 - p)
    acc = 0.0
    for trace, weight in ms.items():
        ts = trace.text
        if len(ts) < i + k - 1 or ts[i - 1] != xs[0]:
            continue
        for end in range(i + k - 1, len(ts) + 1):
            y = ts[i - 1:end]
            if y[-1] != xs[-1]:
                continue
            term = weighted_interior_count(y, xs, q)
            acc += weight * (term if (len(y) - k) % 2 == 0 else -term)
    return acc / (ms.total * (1.0 - p) ** k)


def _block_size(k: int) -> int:
    return max(64, (1 << 20) >> k)


def _embedding_block(bits: np.ndarray, lengths: np.ndarray, weights: np.ndarray, k: int, q: float) -> np.ndarray:
    """Weighted sum, over traces, of (-q)^gaps for embeddings of every k-mer by first position.

    Works right to left. For each suffix pattern ``w`` (all strings of length
    1..k, indexed by length and integer code), ``run[r][u, w]`` holds
    ``sum_{j >= pos} G_w(j) (-q)^(j - pos)`` where ``G_w(j)`` is the weighted
    count of embeddings of ``w`` starting exactly at ``j``.
    """
    U, width = bits.shape
    out = np.zeros((1 << k, width))
    lead = [None] + [np.arange(1 << r) >> (r - 1) for r in range(1, k + 1)]
    tail = [None] + [np.arange(1 << r) & ((1 << (r - 1)) - 1) for r in range(1, k + 1)]
    run = [None] + [np.zeros((U, 1 << r)) for r in range(1, k + 1)]
    decay = -q
    for pos in range(width - 1, -1, -1):
        valid = lengths > pos
        if not valid.any():
            continue
        ch = bits[:, pos]
        for r in range(k, 0, -1):
            start = (ch[:, None] == lead[r][None, :]) & valid[:, None]
            if r > 1:
                g = np.where(start, run[r - 1][:, tail[r]], 0.0)
            else:
                g = start.astype(np.float64)
            run[r] *= decay
            run[r] += g
            if r == k:
                out[:, pos] = weights @ g
    return out


def _capped_block(bits: np.ndarray, lengths: np.ndarray, weights: np.ndarray, k: int, q: float,
                  max_len: int) -> np.ndarray:
    """Per-position scan over observed substrings ``y`` with ``k <= |y| <= max_len``.

    ``interior[j][u, i, z]`` is the (-q)-weighted count of embeddings of the
    length-j pattern ``z`` into the current interior of the substring starting
    at ``i``; the interior grows by one bit per step of ``|y|``.
    """
    U, width = bits.shape
    m = k - 2
    out = np.zeros((1 << k, width))
    padded = np.concatenate([bits, np.zeros((U, width), dtype=bits.dtype)], axis=1)
    starts = np.arange(width)
    first = bits
    interior = [np.ones((U, width, 1))] + [np.zeros((U, width, 1 << j)) for j in range(1, m + 1)]
    codes = [np.arange(1 << j) for j in range(m + 1)]
    zshift = np.arange(1 << m) << 1
    decay = -q
    for ell in range(2, min(max_len, width) + 1):
        ends = starts + ell - 1
        valid = ends[None, :] < lengths[:, None]
        if not valid.any():
            break
        last = padded[:, ends]
        if ell >= k:
            wv = weights[:, None] * valid
            for a in (0, 1):
                for b in (0, 1):
                    sel = wv * ((first == a) & (last == b))
                    contrib = np.einsum("ui,uiz->zi", sel, interior[m])
                    out[(a << (k - 1)) | zshift | b] += contrib
        for j in range(m, 0, -1):
            match = last[:, :, None] == (codes[j] & 1)[None, None, :]
            interior[j] = decay * interior[j] + np.where(match, interior[j - 1][:, :, codes[j] >> 1], 0.0)
        interior[0] = decay * interior[0]
    return out


def _scan(ms: TraceMultiset, k: int, p: float, max_len: Optional[int] = None, workers: int = 1) -> np.ndarray:
    """Sum of per-trace contributions for all k-mers and trace positions, unnormalised.

    Distinct traces are split into fixed-size blocks whose partial sums are
    added in block order, so the result is independent of ``workers``.
    """
    q = p / (1.0 - p)
    size = _block_size(k)
    width = ms.bits.shape[1]
    jobs = [slice(a, min(a + size, len(ms))) for a in range(0, len(ms), size)]
    capped = max_len is not None and max_len < width

    def run(sl):
        args = (ms.bits[sl], ms.lengths[sl], ms.weights[sl], k, q)
        return _capped_block(*args, max_len) if capped else _embedding_block(*args)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(sl) for sl in jobs]
    total = np.zeros((1 << k, width))
    for part in parts:
        total += part
    return total


def estimate_density_map(traces: Traces, k: int, p: float, workers: int = 1) -> DensityMap:
    """Estimate every entry of the k-mer density map from one pass over the traces.

    Parameters
    ----------
    traces : TraceSet or TraceMultiset
        Traces of a length-``n`` source. Weighted multisets are accepted, so
        passing the exact trace law yields the exact map.
    k : int
        k-mer length, at least 2.
    p : float
        Deletion probability used by the channel.
    workers : int
        Thread count; does not change the result.

    Returns
    -------
    DensityMap
        Estimated map. Entries can be negative; they are never clamped.
    """
    if k < 2:
        raise KTooSmall("k must be at least 2")
    _check_p(p)
    ms = _multiset(traces)
    n = ms.n
    if k > n:
        raise ShapeMismatch(f"k={k} exceeds source length n={n}")
    sums = _scan(ms, k, p, workers=workers)
    values = sums[:, : n - k + 1] / (ms.total * (1.0 - p) ** k)
    return DensityMap(k, n, values)


@lru_cache(maxsize=None)
def _interior_binom(ys: str, xs: str) -> int:
    return subseq_count(ys[1:-1], xs[1:-1])


def density_from_position_probs(position_probs: Mapping[tuple[str, int], float], k: int, p: float,
                                n: int) -> DensityMap:
    """Evaluate the inversion formula on a table of substring-at-position probabilities.

    ``position_probs[(y, i)]`` is the probability that a trace shows ``y`` at
    1-based position ``i``; missing keys count as zero. With exact
    probabilities this reproduces the exact density map.
    """
    if k < 2:
        raise KTooSmall("k must be at least 2")
    q = p / (1.0 - p)
    values = np.zeros((1 << k, n - k + 1))
    m = k - 2
    for (ys, i), prob in position_probs.items():
        ell = len(ys)
        if ell < k or prob == 0.0 or i > n - k + 1:
            continue
        factor = prob * (-q) ** (ell - k) if ell > k else prob
        a, b = int(ys[0]), int(ys[-1])
        for z in range(1 << m):
            xs = ys[0] + (format(z, f"0{m}b") if m else "") + ys[-1]
            c = _interior_binom(ys, xs)
            if c:
                values[(a << (k - 1)) | (z << 1) | b, i - 1] += c * factor
    return DensityMap(k, n, values / (1.0 - p) ** k)
