import math

import numpy as np
import pytest

from tracedensity.analysis import (
    binary_entropy,
    bound_functions,
    c_for,
    candidate_distances,
    deck_traces_needed,
    density_distance,
    distinguish,
    traces_needed,
)
from tracedensity.channel import ChannelParams, sample_traces
from tracedensity.density import DensityMap
from tracedensity.errors import InvalidP, ShapeMismatch
from tracedensity.oracle import exact_deck, exact_density_map

A = "0" * 6 + "1" * 3 + "0" * 12
B = "0" * 12 + "1" * 3 + "0" * 6


def test_binary_entropy():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == binary_entropy(1.0) == 0.0
    assert binary_entropy(0.11) == pytest.approx(binary_entropy(0.89))


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
def test_beta_limit_three(c):
    assert abs(bound_functions(c, 1e-6, 1000).beta_c - 3.0) < 0.01


def test_report_relations():
    r = bound_functions(1.0, 0.2, 1000)
    assert r.gamma_c == pytest.approx(r.alpha_c - 1)
    assert r.omega_c == pytest.approx(r.alpha_c + 1)
    assert r.thm2_exponent < r.prior_exponent
    # f_c(n) is O(n^beta_c)
    assert r.f_c_n <= 10 * 1000**r.beta_c


def test_beta_monotone_on_grid():
    grid = np.linspace(0.005, 0.495, 99)
    table = np.array([[bound_functions(c, float(p), 1000).beta_c for p in grid] for c in (0.5, 1.0, 2.0)])
    assert (np.diff(table, axis=1) > 0).all()
    assert (np.diff(table, axis=0) > 0).all()


def test_bounds_validation():
    for p in (0.0, 0.5, 0.7):
        with pytest.raises(InvalidP):
            bound_functions(1.0, p, 100)
    with pytest.raises(ValueError):
        bound_functions(0.0, 0.1, 100)


def test_budget_scaling():
    c = c_for(2, 20)
    assert c == pytest.approx(2 / math.log2(20))
    entry = traces_needed("entry", 20, c, 0.1, 0.05, 0.1)
    full = traces_needed("map", 20, c, 0.1, 0.05, 0.1)
    assert full >= entry
    assert full == 172_945_427
    quarter = traces_needed("map", 20, c, 0.1, 0.025, 0.1)
    assert abs(quarter - 4 * full) <= 4
    with pytest.raises(ValueError):
        traces_needed("all", 20, c, 0.1, 0.05, 0.1)


def test_deck_budgets_positive():
    for mode in ("truncated", "full"):
        assert deck_traces_needed(50, 0.5, 0.1, 0.1, mode=mode) > 0
    # shrinking delta never lowers the budget
    assert deck_traces_needed(50, 0.5, 0.1, 0.01) >= deck_traces_needed(50, 0.5, 0.1, 0.1)


def test_distance_properties():
    a, b = exact_density_map(A, 3, 0.2), exact_density_map(B, 3, 0.2)
    assert density_distance(a, a).linf == 0.0
    d_ab, d_ba = density_distance(a, b), density_distance(b, a)
    assert d_ab.linf == d_ba.linf > 0
    assert exact_deck(A, 3) == exact_deck(B, 3)
    assert max(d_ab.per_kmer_linf.values()) == d_ab.linf
    with pytest.raises(ShapeMismatch):
        density_distance(a, DensityMap(2, 21, np.zeros((4, 20))))


def test_distinguish_noiseless():
    ts = sample_traces(A, ChannelParams(0.0), 1)
    assert distinguish(ts, [A, B], 3, 0.0) == 0
    assert distinguish(ts, [B, A], 3, 0.0) == 1


def test_distinguish_duplicates_take_earlier():
    ts = sample_traces(A, ChannelParams(0.2, seed=1), 2000)
    assert distinguish(ts, [B, A, A], 3, 0.2) == 1


def test_distinguish_ties_go_lexicographic():
    ts = sample_traces(A, ChannelParams(0.2, seed=1), 200)
    # same string twice at different indices: exact tie, earlier index wins
    assert distinguish(ts, [A, A], 3, 0.2) == 0
    dists = candidate_distances(exact_density_map(A, 3, 0.2), [A, B], 0.2)
    assert dists[0] == 0.0 and dists[1] > 0


def test_distinguish_validation():
    ts = sample_traces(A, ChannelParams(0.2), 10)
    with pytest.raises(ValueError):
        distinguish(ts, [A], 3, 0.2)
    with pytest.raises(ShapeMismatch):
        distinguish(ts, [A, "0101"], 3, 0.2)
