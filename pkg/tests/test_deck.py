import math

import numpy as np
import pytest

from tracedensity.bitstring import BitString
from tracedensity.channel import ChannelParams, TraceSet, sample_traces, trace_distribution
from tracedensity.deck import (
    Deck,
    deck_from_occurrence_means,
    estimate_deck,
    estimate_occurrence_mean,
    truncation_depth,
    wildcard_deck_estimate,
)
from tracedensity.errors import GuardExceeded, InvalidP, KTooSmall
from tracedensity.oracle import exact_deck, exact_statistics


def random_source(n, seed):
    return BitString.from_bits(np.random.default_rng(seed).integers(0, 2, n))


def test_occurrence_mean_examples():
    ts = TraceSet.from_traces(["111"], 3, ChannelParams(0.1))
    assert estimate_occurrence_mean(ts, "11") == 2.0
    s = random_source(15, 1)
    noiseless = sample_traces(s, ChannelParams(0.0), 1)
    deck = exact_deck(s, 3)
    for code in range(8):
        assert estimate_occurrence_mean(noiseless, BitString(code, 3)) == deck.counts[code]


def test_occurrence_mean_against_oracle():
    s, p, T = random_source(10, 5), 0.2, 10_000
    ts = sample_traces(s, ChannelParams(p, seed=4), T)
    stats = exact_statistics(s, p, 2)
    law = trace_distribution(s, p)
    for x in ("00", "01", "10", "11", "010"):
        exact = stats.occurrence_mean(x)
        # per-trace variance of the occurrence count under the exact law
        second = sum(w * sum(t.text[a:a + len(x)] == x for a in range(len(t))) ** 2 for t, w in law.items())
        sigma = math.sqrt((second - exact**2) / T)
        assert abs(estimate_occurrence_mean(ts, x) - exact) <= 5 * sigma


def test_noiseless_single_trace_either_mode():
    s = random_source(20, 3)
    ts = sample_traces(s, ChannelParams(0.0), 1)
    for mode in ("full", "truncated"):
        assert estimate_deck(ts, 3, 0.0, mode=mode) == exact_deck(s, 3)


@pytest.mark.parametrize("seed", range(6))
def test_exact_means_reproduce_deck(seed):
    n = (8, 10, 12)[seed % 3]
    k = 2 + seed % 2
    p = (0.1, 0.25, 0.4)[seed % 3]
    s = random_source(n, seed)
    raw = deck_from_occurrence_means(exact_statistics(s, p, k).occurrence_means, k, p)
    assert np.abs(raw - exact_deck(s, k).counts).max() <= 1e-9
    # the trace scan on the exact law is the same quantity
    est = estimate_deck(trace_distribution(s, p), k, p)
    assert np.abs(est.raw - raw).max() <= 1e-9


def test_truncated_mode_drops_long_substrings():
    s = random_source(12, 8)
    law = trace_distribution(s, 0.3)
    full = estimate_deck(law, 2, 0.3)
    trunc = estimate_deck(law, 2, 0.3, mode="truncated")
    # the cap exceeds n here, so nothing is dropped
    assert np.allclose(full.raw, trunc.raw, atol=1e-12)
    means = exact_statistics(s, 0.3, 2).occurrence_means
    short = deck_from_occurrence_means(means, 2, 0.3, max_len=4)
    assert np.abs(short - full.raw).max() > 1e-3


def test_deck_at_moderate_length():
    s, p, k = random_source(50, 0), 0.1, 3
    truth = exact_deck(s, k)
    hits = sum(estimate_deck(sample_traces(s, ChannelParams(p, seed=r), 100_000), k, p) == truth for r in range(20))
    assert hits >= 19


def test_deck_rounding_clamps_negatives():
    d = Deck.from_raw(2, np.array([-0.7, 0.4, 1.6, 2.5]))
    assert d.counts.tolist() == [0, 0, 2, 2]
    assert d["10"] == 2


def test_truncation_depth():
    assert truncation_depth(3, 21, 0.1) == pytest.approx(217.8, abs=0.1)
    assert truncation_depth(3, 22, 0.1) > truncation_depth(3, 21, 0.1)
    assert truncation_depth(3, 21, 0.4999) > 100 * truncation_depth(3, 21, 0.1)
    with pytest.raises(InvalidP):
        truncation_depth(3, 21, 0.5)
    c, p = 1.0, 0.2
    ratios = [truncation_depth(c * math.log2(n), n, p) / math.log(n) for n in (2**4, 2**8, 2**16, 2**32)]
    assert max(ratios) / min(ratios) < 1.01


def test_wildcard_gapped_counts():
    ts = TraceSet.from_traces(["0011"], 4, ChannelParams(0.2))
    q = 0.25
    # '01' occurs once contiguously; '0*1' occurs twice: positions (1,3) and (2,4)
    assert wildcard_deck_estimate(ts, "01", 0.2, 1) == pytest.approx((1 - 2 * q) / 0.8**2)
    assert wildcard_deck_estimate(ts, "01", 0.0, 3) == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(4))
def test_wildcard_matches_deck_formula(seed):
    s = random_source(10, seed)
    p, k = (0.1, 0.3, 0.2, 0.45)[seed], 2 + seed % 2
    law = trace_distribution(s, p)
    raw = deck_from_occurrence_means(exact_statistics(s, p, k).occurrence_means, k, p)
    for code in range(1 << k):
        x = BitString(code, k)
        assert wildcard_deck_estimate(law, x, p, len(s) - k) == pytest.approx(raw[code], abs=1e-9)


def test_wildcard_guards():
    ts = TraceSet.from_traces(["0011"], 4, ChannelParams(0.2))
    with pytest.raises(KTooSmall):
        wildcard_deck_estimate(ts, "0", 0.2, 1)
    with pytest.raises(GuardExceeded):
        wildcard_deck_estimate(ts, "0" * 8, 0.2, 200)
