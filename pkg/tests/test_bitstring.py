import itertools
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tracedensity.bitstring import (
    BitString,
    enumerate_supersequences,
    interior_count,
    parse_bits,
    slice_bits,
    subseq_count,
    supersequence_enumerations,
    weighted_interior_count,
)
from tracedensity.errors import EndpointMismatch, GuardExceeded, InvalidCharacter, KTooSmall, OutOfRange

bits = st.text(alphabet="01", min_size=1, max_size=40)


def brute_subseq(y, x):
    return sum(1 for idx in itertools.combinations(range(len(y)), len(x)) if "".join(y[i] for i in idx) == x)


def test_parse_examples():
    b = parse_bits("1001")
    assert list(b) == [1, 0, 0, 1]
    assert len(parse_bits("0")) == 1
    with pytest.raises(InvalidCharacter):
        parse_bits("12")
    with pytest.raises(InvalidCharacter):
        parse_bits("")


def test_leading_zeros_survive():
    b = parse_bits("0001")
    assert b.text == "0001" and len(b) == 4 and b.value == 1
    assert b != parse_bits("01")


@given(bits)
def test_text_round_trip(text):
    b = parse_bits(text)
    assert b.text == text
    assert BitString.from_bits(b.to_array()) == b
    assert BitString.from_text(str(b)) == b


def test_slice_examples():
    assert slice_bits("10101", 1, 3) == "101"
    assert slice_bits("10101", 2, -2) == "010"
    assert len(slice_bits("10", 2, 1)) == 0


def test_slice_bounds():
    with pytest.raises(OutOfRange):
        slice_bits("101", 0, 2)
    with pytest.raises(OutOfRange):
        slice_bits("101", 2, 4)
    with pytest.raises(OutOfRange):
        slice_bits("101", 3, 1)


@given(bits, st.data())
def test_slice_matches_python(text, data):
    n = len(text)
    i = data.draw(st.integers(1, n))
    j = data.draw(st.integers(max(i - 1, 1), n))
    assert slice_bits(text, i, j).text == text[i - 1:j]
    # negative indices count from the right
    assert slice_bits(text, i - n - 1, j).text == text[i - 1:j]


def test_bit_access():
    b = parse_bits("1101")
    assert (b.bit(1), b.bit(-1), b.first, b.last) == (1, 1, 1, 1)
    assert b.bit(3) == 0
    assert b.interior() == "10"


def test_subseq_examples():
    assert subseq_count("1011", "101") == 2
    assert subseq_count("0110", "0110") == 1
    assert subseq_count("0110", "") == 1
    assert subseq_count("01", "011") == 0


@given(st.text(alphabet="01", max_size=10), st.text(alphabet="01", max_size=5))
def test_subseq_matches_brute_force(y, x):
    c = subseq_count(y, x)
    assert c == brute_subseq(y, x)
    assert c <= comb(len(y), len(x))


def test_weighted_examples():
    assert weighted_interior_count("1001", "101", 0.5) == pytest.approx(1.0)
    assert weighted_interior_count("0110", "0110", 0.3) == 1.0
    assert weighted_interior_count("1011", "111", 0.25) == pytest.approx(0.25)
    with pytest.raises(EndpointMismatch):
        weighted_interior_count("0011", "111", 0.25)
    with pytest.raises(KTooSmall):
        weighted_interior_count("1", "1", 0.25)


@settings(max_examples=200)
@given(st.text(alphabet="01", min_size=2, max_size=12), st.data(), st.floats(0.0, 0.99))
def test_weighted_is_interior_count_times_power(y, data, q):
    k = data.draw(st.integers(2, len(y)))
    mid = data.draw(st.text(alphabet="01", min_size=k - 2, max_size=k - 2))
    x = y[0] + mid + y[-1]
    expected = interior_count(y, x) * q ** (len(y) - k)
    assert weighted_interior_count(y, x, q) == pytest.approx(expected, rel=1e-12, abs=1e-300)


def test_supersequence_examples():
    assert {y.text for y in enumerate_supersequences("101", 4)} == {"1011", "1101", "1001"}
    assert enumerate_supersequences("0110", 4) == {parse_bits("0110")}
    brute = {
        "".join(t) for t in itertools.product("01", repeat=5)
        if t[0] == "1" and t[-1] == "1" and subseq_count("".join(t), "101")
    }
    assert {y.text for y in enumerate_supersequences("101", 5)} == brute


def test_supersequence_guard_and_counter():
    before = supersequence_enumerations()
    enumerate_supersequences("11", 3)
    assert supersequence_enumerations() == before + 1
    with pytest.raises(GuardExceeded):
        enumerate_supersequences("11", 21)
