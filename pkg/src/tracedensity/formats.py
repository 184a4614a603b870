"""Plain-text file formats for traces, density maps, decks and bound tables.

Floats are written with ``repr`` (shortest round-trip form), so a write
followed by a read reproduces every value bit for bit. Except for the traces
file, whose first line is fixed, every file opens with ``#`` lines naming the
tool version and the parameters that produced it.
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping, Optional, TextIO

import numpy as np

from ._version import __version__
from .analysis import BoundsReport
from .channel import ChannelParams, TraceSet
from .deck import Deck
from .density import DensityMap, kmer_from_code
from .errors import FormatError

__all__ = [
    "format_float",
    "header_lines",
    "write_traces",
    "read_traces",
    "write_density_csv",
    "read_density_csv",
    "write_deck_tsv",
    "read_deck_tsv",
    "write_bounds_csv",
    "BOUNDS_COLUMNS",
]

BOUNDS_COLUMNS = ("p", "c", "alpha", "beta", "gamma", "omega", "thm2_exp", "prior_exp", "d")

_TRACES_HEADER = re.compile(r"# n=(\d+) p=(\S+) seed=(\d+) T=(\d+)")


def format_float(x: float) -> str:
    return repr(float(x))


def header_lines(command: str, params: Optional[Mapping[str, object]] = None) -> str:
    """``#`` comment block: tool and version, then ``key=value`` pairs in the given order."""
    out = f"# tracedensity {__version__} {command}\n"
    if params:
        fields = []
        for key, value in params.items():
            if isinstance(value, float):
                value = format_float(value)
            fields.append(f"{key}={value}")
        out += "# " + " ".join(fields) + "\n"
    return out


def write_traces(traces: TraceSet, stream: TextIO) -> None:
    p = traces.params
    stream.write(f"# n={traces.n} p={format_float(p.p)} seed={p.seed} T={traces.count}\n")
    n = traces.bits.shape[1]
    raw = (traces.bits.astype(np.uint8) + ord("0")).tobytes()
    lines = [raw[r * n:r * n + int(length)].decode("ascii") for r, length in enumerate(traces.lengths)]
    if lines:
        stream.write("\n".join(lines) + "\n")


def read_traces(stream: TextIO) -> TraceSet:
    """Parse a traces file written by :func:`write_traces`.

    Exactly ``T`` trace lines must follow the header; empty lines are empty traces.
    """
    text = stream.read()
    lines = text.split("\n")
    m = _TRACES_HEADER.fullmatch(lines[0])
    if m is None:
        raise FormatError(f"bad traces header: {lines[0]!r}")
    n, seed, T = int(m.group(1)), int(m.group(3)), int(m.group(4))
    try:
        p = float(m.group(2))
    except ValueError:
        raise FormatError(f"bad p in traces header: {m.group(2)!r}") from None
    body = lines[1:]
    if body and body[-1] == "":
        body = body[:-1]
    if len(body) != T:
        raise FormatError(f"header promises T={T} traces, found {len(body)}")
    bits = np.zeros((T, n), dtype=np.uint8)
    lengths = np.zeros(T, dtype=np.int64)
    for row, line in enumerate(body):
        if len(line) > n:
            raise FormatError(f"trace on line {row + 2} is longer than n={n}")
        if line.strip("01"):
            raise FormatError(f"trace on line {row + 2} has characters other than 0/1")
        bits[row, :len(line)] = np.frombuffer(line.encode("ascii"), dtype=np.uint8) - ord("0")
        lengths[row] = len(line)
    return TraceSet(bits, lengths, n, ChannelParams(p, seed))


def _data_lines(stream: TextIO, columns: str, sep: str):
    """Skip ``#`` lines, check the column header, yield split data rows."""
    seen_header = False
    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if line.startswith("#") or not line:
            continue
        if not seen_header:
            if line != columns:
                raise FormatError(f"line {lineno}: expected column header {columns!r}, got {line!r}")
            seen_header = True
            continue
        yield lineno, line.split(sep)
    if not seen_header:
        raise FormatError(f"missing column header {columns!r}")


def write_density_csv(density: DensityMap, stream: TextIO, header: str = "") -> None:
    stream.write(header)
    stream.write("kmer,i,value\n")
    rows = []
    for code in range(1 << density.k):
        kmer = kmer_from_code(code, density.k).text
        for i, v in enumerate(density.values[code], start=1):
            rows.append(f"{kmer},{i},{format_float(v)}\n")
    stream.write("".join(rows))


def read_density_csv(stream: TextIO) -> DensityMap:
    cells = {}
    k = None
    for lineno, parts in _data_lines(stream, "kmer,i,value", ","):
        if len(parts) != 3:
            raise FormatError(f"line {lineno}: expected 3 fields")
        kmer, i, value = parts
        if k is None:
            k = len(kmer)
        if len(kmer) != k or kmer.strip("01"):
            raise FormatError(f"line {lineno}: bad k-mer {kmer!r}")
        cells[(int(kmer, 2), int(i))] = float(value)
    if k is None:
        raise FormatError("density file has no rows")
    width = max(i for _, i in cells)
    if len(cells) != (1 << k) * width:
        raise FormatError(f"expected {(1 << k) * width} rows, found {len(cells)}")
    values = np.zeros((1 << k, width))
    for (code, i), v in cells.items():
        values[code, i - 1] = v
    return DensityMap(k, width + k - 1, values)


def write_deck_tsv(deck: Deck, stream: TextIO, header: str = "") -> None:
    stream.write(header)
    stream.write("kmer\traw\tcount\n")
    stream.write("".join(
        f"{kmer_from_code(c, deck.k).text}\t{format_float(deck.raw[c])}\t{int(deck.counts[c])}\n"
        for c in range(1 << deck.k)
    ))


def read_deck_tsv(stream: TextIO) -> Deck:
    rows = {}
    k = None
    for lineno, parts in _data_lines(stream, "kmer\traw\tcount", "\t"):
        if len(parts) != 3:
            raise FormatError(f"line {lineno}: expected 3 fields")
        kmer, raw, count = parts
        k = k or len(kmer)
        if len(kmer) != k or kmer.strip("01"):
            raise FormatError(f"line {lineno}: bad k-mer {kmer!r}")
        rows[int(kmer, 2)] = (float(raw), int(count))
    if k is None:
        raise FormatError("deck file has no rows")
    raw = np.zeros(1 << k)
    counts = np.zeros(1 << k, dtype=np.int64)
    for code, (r, c) in rows.items():
        raw[code], counts[code] = r, c
    return Deck(k, raw, counts)


def write_bounds_csv(reports: Iterable[BoundsReport], stream: TextIO, header: str = "") -> None:
    stream.write(header)
    stream.write(",".join(BOUNDS_COLUMNS) + "\n")
    for r in reports:
        vals = (r.p, r.c, r.alpha_c, r.beta_c, r.gamma_c, r.omega_c, r.thm2_exponent, r.prior_exponent, r.d)
        stream.write(",".join(format_float(v) for v in vals) + "\n")
