"""Sample-complexity bound functions, density-map distances and distinguishing.

All logarithms in the bound functions are base 2 (``k = c log2 n``), except
the truncation depth, which uses natural logarithms.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .bitstring import BitsLike, as_bits
from .channel import TraceMultiset, TraceSet
from .deck import truncation_depth
from .density import DensityMap, estimate_density_map, kmer_from_code
from .errors import InvalidP, ShapeMismatch
from .oracle import exact_density_map

__all__ = [
    "BoundsReport",
    "binary_entropy",
    "bound_functions",
    "traces_needed",
    "deck_traces_needed",
    "c_for",
    "DensityDistance",
    "density_distance",
    "candidate_distances",
    "distinguish",
]


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def _check(c: float, p: float, n: float) -> None:
    if not 0.0 < p < 0.5:
        raise InvalidP(f"bounds need 0 < p < 1/2, got {p}")
    if c <= 0:
        raise ValueError("c must be positive")
    if n < 2:
        raise ValueError("n must be at least 2")


def c_for(k: int, n: int) -> float:
    """The constant ``c`` with ``k = c log2 n``."""
    return k / math.log2(n)


@dataclass(frozen=True)
class BoundsReport:
    c: float
    p: float
    n: float
    alpha_c: float
    beta_c: float
    f_c_n: float
    gamma_c: float
    omega_c: float
    thm2_exponent: float
    prior_exponent: float
    d: float

    def as_dict(self) -> dict:
        return asdict(self)


def _alpha(c: float, p: float) -> float:
    q = p / (1.0 - p)
    return 1.0 + c * math.log2((1.0 - p) / p) + (c * binary_entropy(1.0 - q) + c * math.log2(q)) / (1.0 - q)


def bound_functions(c: float, p: float, n: float) -> BoundsReport:
    """Evaluate every closed-form exponent and bound at ``(c, p, n)``.

    ``alpha_c`` and ``f_c(n)`` size the density-map trace budget;
    ``beta_c`` is the degree of the polynomial bounding ``f_c``;
    ``gamma_c`` and ``omega_c`` enter the deck budgets; the two exponents
    compare the deck bound proved here against the earlier one.
    """
    _check(c, p, n)
    q = p / (1.0 - p)
    alpha = _alpha(c, p)
    beta = 2.0 * alpha - 2.0 * c * math.log2(1.0 - p) + 1.0
    f = (1.0 + 2.0 * n**alpha) ** 2 / (2.0 * n ** (2.0 * c * math.log2(1.0 - p) - 1.0))
    gamma = alpha - 1.0
    omega = alpha + 1.0
    thm2 = 1.0 + c * (
        ((1.0 - p) * binary_entropy(1.0 - q) + p * math.log2(q)) / (0.5 - p)
        + 2.0 * math.log2(1.0 / (1.0 - p))
    )
    prior = 4.0 + 12.0 * c * (math.e**2 / (0.5 - p)) + c * math.log2(4.0)
    d = truncation_depth(c * math.log2(n), n, p)
    return BoundsReport(c, p, n, alpha, beta, f, gamma, omega, thm2, prior, d)


def traces_needed(kind: str, n: int, c: float, p: float, eps: float, delta: float) -> int:
    """Trace budget for a single density entry (``"entry"``) or the whole map (``"map"``).

    ``log2(2/delta) eps^-2 f_c(n)`` for one entry; the map variant replaces
    ``2/delta`` by ``2 n^(1+c)/delta`` (union bound over ``n 2^k`` entries).
    """
    _check(c, p, n)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    f = bound_functions(c, p, n).f_c_n
    if kind == "entry":
        conf = math.log2(2.0 / delta)
    elif kind == "map":
        conf = math.log2(2.0 * n ** (1.0 + c) / delta)
    else:
        raise ValueError(f"unknown budget kind {kind!r}")
    return math.ceil(conf * f / eps**2)


def deck_traces_needed(n: int, c: float, p: float, delta: float, mode: str = "truncated") -> int:
    """Traces sufficient to recover one deck count with probability ``1 - delta``.

    ``"truncated"``: ``log2(1/delta) (25/2) n (n^(-c log2(1-p)) (c log2 n + 2 d^2 n^gamma))^2``.
    ``"full"``: ``log2(1/delta) 2 n (n^(-c log2(1-p)) (c log2 n + 2 n^omega))^2``.
    """
    _check(c, p, n)
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    r = bound_functions(c, p, n)
    shrink = n ** (-c * math.log2(1.0 - p))
    logn = c * math.log2(n)
    if mode == "truncated":
        value = math.log2(1.0 / delta) * 12.5 * n * (shrink * (logn + 2.0 * r.d**2 * n**r.gamma_c)) ** 2
    elif mode == "full":
        value = math.log2(1.0 / delta) * 2.0 * n * (shrink * (logn + 2.0 * n**r.omega_c)) ** 2
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return math.ceil(value)


class DensityDistance(NamedTuple):
    linf: float
    per_kmer_l1: dict
    per_kmer_linf: dict


def density_distance(a: DensityMap, b: DensityMap) -> DensityDistance:
    """Sup-norm distance between two maps, with per-k-mer l1 and sup norms."""
    if not a.same_shape(b):
        raise ShapeMismatch(f"maps differ in shape: (k={a.k}, n={a.n}) vs (k={b.k}, n={b.n})")
    diff = np.abs(a.values - b.values)
    l1 = {kmer_from_code(c, a.k): float(diff[c].sum()) for c in range(1 << a.k)}
    linf_x = {kmer_from_code(c, a.k): float(diff[c].max()) for c in range(1 << a.k)}
    return DensityDistance(float(diff.max()), l1, linf_x)


def candidate_distances(estimate: DensityMap, candidates: Sequence[BitsLike], p: float) -> list[float]:
    return [density_distance(estimate, exact_density_map(c, estimate.k, p)).linf for c in candidates]


def distinguish(traces: Union[TraceSet, TraceMultiset], candidates: Sequence[BitsLike], k: int, p: float,
                workers: int = 1) -> int:
    """Index of the candidate whose exact density map is nearest the estimated one.

    Ties go to the lexicographically smaller candidate, then to the earlier index.
    """
    cands = [as_bits(c) for c in candidates]
    if len(cands) < 2:
        raise ValueError("need at least two candidates")
    n = traces.multiset().n
    if any(len(c) != n for c in cands):
        raise ShapeMismatch(f"every candidate must have length n={n}")
    estimate = estimate_density_map(traces, k, p, workers=workers)
    dists = candidate_distances(estimate, cands, p)
    return min(range(len(cands)), key=lambda j: (dists[j], cands[j].text, j))
