import io

import numpy as np
import pytest

from tracedensity.analysis import bound_functions
from tracedensity.bitstring import BitString
from tracedensity.channel import ChannelParams, TraceSet, sample_traces
from tracedensity.deck import estimate_deck
from tracedensity.density import estimate_density_map
from tracedensity.errors import FormatError
from tracedensity.formats import (
    BOUNDS_COLUMNS,
    header_lines,
    read_deck_tsv,
    read_density_csv,
    read_traces,
    write_bounds_csv,
    write_deck_tsv,
    write_density_csv,
    write_traces,
)


def round_trip(write, read, obj, *args):
    buf = io.StringIO()
    write(obj, buf, *args)
    text = buf.getvalue()
    return text, read(io.StringIO(text))


def test_traces_round_trip_with_empty_traces():
    s = BitString.from_bits(np.random.default_rng(0).integers(0, 2, 12))
    ts = sample_traces(s, ChannelParams(0.7, seed=123), 400)
    assert (ts.lengths == 0).any()
    text, back = round_trip(write_traces, read_traces, ts)
    assert back == ts
    assert text.splitlines()[0] == "# n=12 p=0.7 seed=123 T=400"
    # and byte-exact on a second pass
    assert round_trip(write_traces, read_traces, back)[0] == text


def test_traces_example_file():
    ts = sample_traces("0101", ChannelParams(0.0, seed=7), 2)
    buf = io.StringIO()
    write_traces(ts, buf)
    assert buf.getvalue() == "# n=4 p=0.0 seed=7 T=2\n0101\n0101\n"


def test_trailing_empty_trace_survives():
    ts = TraceSet.from_traces(["01"], 3, ChannelParams(0.5, 1))
    ts = TraceSet(np.vstack([ts.bits, np.zeros((1, 3), np.uint8)]), np.array([2, 0]), 3, ts.params)
    text, back = round_trip(write_traces, read_traces, ts)
    assert text.endswith("01\n\n")
    assert back == ts


@pytest.mark.parametrize("text", [
    "n=4 p=0.1 seed=1 T=1\n0101\n",
    "# n=4 p=0.1 seed=1 T=2\n0101\n",
    "# n=4 p=0.1 seed=1 T=1\n01012\n",
    "# n=2 p=0.1 seed=1 T=1\n0101\n",
    "# n=4 p=zero seed=1 T=1\n0101\n",
])
def test_bad_traces_files(text):
    with pytest.raises(FormatError):
        read_traces(io.StringIO(text))


def test_density_round_trip_is_exact():
    ts = sample_traces("011010011010", ChannelParams(0.3, seed=4), 500)
    dm = estimate_density_map(ts, 3, 0.3)
    text, back = round_trip(write_density_csv, read_density_csv, dm, header_lines("density", {"k": 3}))
    assert text.startswith("# tracedensity ")
    assert back.values.tobytes() == dm.values.tobytes()
    assert (back.k, back.n) == (3, 12)


def test_deck_round_trip_sorted():
    ts = sample_traces("011010011010", ChannelParams(0.3, seed=4), 500)
    deck = estimate_deck(ts, 3, 0.3)
    text, back = round_trip(write_deck_tsv, read_deck_tsv, deck)
    rows = [line.split("\t")[0] for line in text.splitlines()[1:]]
    assert rows == sorted(rows, key=lambda r: int(r, 2))
    assert back == deck and back.raw.tobytes() == deck.raw.tobytes()


def test_missing_column_header():
    with pytest.raises(FormatError):
        read_density_csv(io.StringIO("# x\n000,1,0.5\n"))


def test_bounds_csv_columns():
    buf = io.StringIO()
    write_bounds_csv([bound_functions(1.0, 0.1, 100), bound_functions(2.0, 0.1, 100)], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(BOUNDS_COLUMNS)
    assert len(lines) == 3 and all(len(row.split(",")) == 9 for row in lines[1:])


def test_header_floats_round_trip():
    h = header_lines("cmd", {"p": 0.1 + 0.2, "k": 3})
    assert "p=0.30000000000000004" in h and h.startswith("# tracedensity ")
