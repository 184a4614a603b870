"""Oracle-backed identity suites.

Each suite compares a fast path against brute force on small instances and
returns a :class:`SuiteResult`. The CLI ``verify`` command and the acceptance
tests both run these.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .analysis import bound_functions, distinguish
from .bitstring import BitString, subseq_count
from .channel import ChannelParams, sample_traces, trace_distribution
from .deck import deck_from_occurrence_means, truncation_depth, wildcard_deck_estimate
from .density import density_from_position_probs, estimate_density_map, expansion_coefficient
from .oracle import (coefficient_by_recursion, exact_deck, exact_density_map, exact_statistics,
                     subsequence_identity_sum)

__all__ = ["SuiteResult", "SUITES", "run_suite", "instance_grid", "SAME_DECK_PAIR"]

GRID_N = (8, 10, 12)
GRID_K = (2, 3)
GRID_P = (0.1, 0.25, 0.4)

# two sources with equal 3-mer decks but different density maps
SAME_DECK_PAIR = ("0" * 6 + "1" * 3 + "0" * 12, "0" * 12 + "1" * 3 + "0" * 6)


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    max_error: float = 0.0
    passed: bool = True
    failure: Optional[str] = None
    detail: dict = field(default_factory=dict)

    def record(self, error: float, ok: bool, case: str) -> None:
        self.cases += 1
        self.max_error = max(self.max_error, error)
        if not ok and self.passed:
            self.passed = False
            self.failure = case

    def summary(self) -> str:
        state = "pass" if self.passed else f"FAIL at {self.failure}"
        return f"{self.name}: {state} ({self.cases} cases, max error {self.max_error:.3g})"


def instance_grid(count: int = 50, seed: int = 0, ns: Sequence[int] = GRID_N, ks: Sequence[int] = GRID_K,
                  ps: Sequence[float] = GRID_P) -> list[tuple[BitString, int, float]]:
    """``count`` random sources cycling through the (n, k, p) grid."""
    rng = np.random.default_rng(seed)
    grid = list(itertools.product(ns, ks, ps))
    out = []
    for idx in range(count):
        n, k, p = grid[idx % len(grid)]
        out.append((BitString.from_bits(rng.integers(0, 2, n)), k, p))
    return out


def lemma1(count: int = 50, seed: int = 0, n: Optional[int] = None, p: Optional[float] = None,
           tol: float = 1e-9) -> SuiteResult:
    """Density map from exact position probabilities, and the estimator on the exact trace law, vs the kernel sum."""
    res = SuiteResult("lemma1")
    grid = instance_grid(count, seed, ns=(n,) if n else GRID_N, ps=(p,) if p is not None else GRID_P)
    for s, k, pp in grid:
        exact = exact_density_map(s, k, pp).values
        stats = exact_statistics(s, pp, k)
        via_formula = density_from_position_probs(stats.position_probs, k, pp, len(s)).values
        via_estimator = estimate_density_map(trace_distribution(s, pp), k, pp).values
        err = max(np.abs(via_formula - exact).max(), np.abs(via_estimator - exact).max())
        res.record(float(err), err <= tol, f"s={s.text} k={k} p={pp}")
    return res


def _strings_upto(length: int) -> list[str]:
    return [""] + ["".join(t) for ell in range(1, length + 1) for t in itertools.product("01", repeat=ell)]


def lemma2(max_len: int = 6, spot_checks: int = 40) -> SuiteResult:
    """Alternating subsequence-count sum equals the identity for all pairs with ``|f|, |g| <= max_len``.

    All pairs are checked at once as the integer matrix product ``B S B S``
    with ``B[f, h] = binom(f, h)`` and ``S`` the sign diagonal; a handful of
    pairs are re-checked by direct summation.
    """
    res = SuiteResult("lemma2")
    words = _strings_upto(max_len)
    B = np.array([[subseq_count(f, h) for h in words] for f in words], dtype=np.int64)
    sign = np.diag([(-1) ** len(w) for w in words]).astype(np.int64)
    M = B @ sign @ B @ sign
    diff = np.abs(M - np.eye(len(words), dtype=np.int64))
    bad = np.argwhere(diff)
    res.cases = len(words) ** 2
    res.max_error = float(diff.max())
    if len(bad):
        res.passed = False
        res.failure = f"f={words[bad[0][0]]!r} g={words[bad[0][1]]!r}"
    rng = np.random.default_rng(0)
    for _ in range(spot_checks):
        f = words[rng.integers(len(words))] or "0"
        g = words[rng.integers(len(words))] or "1"
        direct = subsequence_identity_sum(f, g)
        res.record(abs(direct - int(f == g)), direct == int(f == g), f"direct f={f} g={g}")
    return res


def deck_identity(count: int = 50, seed: int = 0, tol: float = 1e-9) -> SuiteResult:
    """Deck formula on exact occurrence means rounds to the exact deck; gapped-pattern form agrees."""
    res = SuiteResult("deck-identity")
    for s, k, p in instance_grid(count, seed):
        n = len(s)
        truth = exact_deck(s, k)
        raw = deck_from_occurrence_means(exact_statistics(s, p, k).occurrence_means, k, p)
        rounded = np.maximum(0, np.rint(raw)).astype(np.int64)
        ok = np.array_equal(rounded, truth.counts)
        res.record(float(np.abs(raw - truth.counts).max()), ok, f"s={s.text} k={k} p={p} (rounding)")
        law = trace_distribution(s, p)
        for code in range(1 << k):
            x = BitString(code, k)
            est = wildcard_deck_estimate(law, x, p, n - k)
            err = abs(est - raw[code])
            res.record(float(err), err <= tol, f"s={s.text} x={x.text} p={p} (wildcard)")
    return res


def truncation(max_n: int = 14, ps: Sequence[float] = (0.1, 0.3, 0.45), count: int = 6, seed: int = 0,
               tol: float = 0.1) -> SuiteResult:
    """Full vs truncated deck formula on exact occurrence means, at the truncation depth."""
    res = SuiteResult("truncation")
    rng = np.random.default_rng(seed)
    cap_hit = 0
    for idx in range(count):
        n = max_n - 2 * (idx % 3)
        s = BitString.from_bits(rng.integers(0, 2, n))
        for p in ps:
            for k in (2, 3):
                means = exact_statistics(s, p, k).occurrence_means
                full = deck_from_occurrence_means(means, k, p)
                cap = k + math.floor(truncation_depth(k, n, p))
                cap_hit += cap < n
                trunc = deck_from_occurrence_means(means, k, p, max_len=cap)
                err = float(np.abs(full - trunc).max())
                res.record(err, err <= tol, f"s={s.text} k={k} p={p}")
    res.detail["instances_where_cap_below_n"] = cap_hit
    return res


def coefficients(x_len: int = 3, max_y: int = 6) -> SuiteResult:
    """Closed-form expansion coefficients equal the recursive definition."""
    res = SuiteResult("coefficients")
    for xt in itertools.product("01", repeat=x_len):
        x = "".join(xt)
        for ell in range(x_len + 1, max_y + 1):
            for mid in itertools.product("01", repeat=ell - 2):
                y = x[0] + "".join(mid) + x[-1]
                closed = expansion_coefficient(x, y)
                rec = coefficient_by_recursion(x, y)
                res.record(abs(closed - rec), closed == rec, f"x={x} y={y}")
    return res


def bounds(cs: Sequence[float] = (0.5, 1.0, 2.0), points: int = 99, n: float = 1000.0) -> SuiteResult:
    """Shape claims for the trace-count exponent: limit 3 as p -> 0, monotone in p and c, new exponent below the old."""
    res = SuiteResult("bounds")
    for c in cs:
        beta0 = bound_functions(c, 1e-6, n).beta_c
        res.record(abs(beta0 - 3.0), abs(beta0 - 3.0) < 0.01, f"beta limit c={c}")
    grid = np.linspace(0.005, 0.495, points)
    table = np.array([[bound_functions(c, float(p), n).beta_c for p in grid] for c in cs])
    dp = np.diff(table, axis=1)
    res.record(float(max(0.0, -dp.min())), bool((dp > 0).all()), "beta increasing in p")
    dc = np.diff(table, axis=0)
    res.record(float(max(0.0, -dc.min())), bool((dc > 0).all()), "beta increasing in c")
    worst_gap = math.inf
    for c in cs:
        for p in grid:
            r = bound_functions(c, float(p), n)
            gap = r.prior_exponent - r.thm2_exponent
            worst_gap = min(worst_gap, gap)
            res.record(0.0, gap > 0, f"exponent comparison c={c} p={p}")
    res.detail["min_exponent_gap"] = worst_gap
    return res


def distinguish_suite(trials: int = 100, p: float = 0.2, T: int = 50_000, k: int = 3, seed: int = 0,
                      required: float = 0.95, workers: int = 1) -> SuiteResult:
    """Equal decks, distinct maps, and the distinguisher picks the true source in most trials."""
    res = SuiteResult("distinguish")
    a, b = SAME_DECK_PAIR
    res.record(0.0, exact_deck(a, k) == exact_deck(b, k), "decks equal")
    gap = float(np.abs(exact_density_map(a, k, p).values - exact_density_map(b, k, p).values).max())
    res.detail["map_distance"] = gap
    res.record(0.0, gap > 0, "maps differ")
    wins = 0
    for t in range(trials):
        truth = t % 2
        traces = sample_traces((a, b)[truth], ChannelParams(p, seed + t), T, workers=workers)
        wins += distinguish(traces, [a, b], k, p, workers=workers) == truth
    res.detail["wins"] = wins
    res.record(1.0 - wins / trials, wins >= required * trials, f"{wins}/{trials} correct")
    return res


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "lemma1": lemma1,
    "lemma2": lemma2,
    "deck-identity": deck_identity,
    "truncation": truncation,
    "coefficients": coefficients,
    "bounds": bounds,
    "distinguish": distinguish_suite,
}


def run_suite(name: str, **kwargs) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](**kwargs)
