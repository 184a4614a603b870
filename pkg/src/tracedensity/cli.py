"""Command-line front end: ``tracedensity <command> ...``.

Exit status is 0 on success, 2 on a usage error and 1 on a runtime error.
Outputs go to ``--out`` (``-`` for stdout) and are assembled in memory
first, so a failed run never leaves a partial file behind.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ._version import __version__
from .analysis import bound_functions, c_for, candidate_distances, deck_traces_needed, traces_needed
from .bitstring import BitString, parse_bits
from .channel import ChannelParams, TraceSet, sample_traces
from .deck import estimate_deck
from .density import estimate_density_map
from .errors import TraceDensityError
from .formats import (format_float, header_lines, read_deck_tsv, read_density_csv, read_traces,
                      write_bounds_csv, write_deck_tsv, write_density_csv, write_traces)
from .oracle import exact_deck, exact_density_map, exact_statistics
from .reconstruct import build_debruijn, eulerian_paths, merge_reconstruct, ridge_reconstruct
from .verify import SUITES

__all__ = ["ExperimentConfig", "build_parser", "run", "main"]

# seeds the random-source draw apart from the per-block trace streams
_SOURCE_STREAM = 0x5EED

_INPUT_FILES = ("traces", "density", "deck")


@dataclass
class ExperimentConfig:
    """Parameters of one invocation, echoed into the output header.

    Only fields that were actually set are echoed. ``threads`` and ``out``
    never are, so outputs do not depend on them.
    """

    command: str
    source: Optional[str] = None
    traces: Optional[str] = None
    density: Optional[str] = None
    deck: Optional[str] = None
    n: Optional[int] = None
    k: Optional[int] = None
    c: Optional[float] = None
    p: Optional[float] = None
    T: Optional[int] = None
    seed: Optional[int] = None
    eps: Optional[float] = None
    delta: Optional[float] = None
    lam: Optional[float] = None
    tau: Optional[float] = None
    mode: Optional[str] = None
    repetitions: Optional[int] = None
    threads: int = 1
    out: str = "-"
    extra: dict = field(default_factory=dict)

    _silent = ("command", "threads", "out", "extra")

    def header_params(self) -> dict:
        params = {f.name: getattr(self, f.name) for f in fields(self)
                  if f.name not in self._silent and getattr(self, f.name) is not None}
        params.update(self.extra)
        return params

    def header(self) -> str:
        return header_lines(self.command, self.header_params())


class _UsageError(Exception):
    pass


def _bits_arg(text: str) -> BitString:
    try:
        return parse_bits(text)
    except TraceDensityError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _prob_arg(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1), got {text}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {text}")
    return value


def _seed_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return value


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _grid_arg(text: str) -> np.ndarray:
    parts = text.split(":")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except (ValueError, IndexError):
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}") from None
    if len(parts) != 3 or count < 1:
        raise argparse.ArgumentTypeError(f"expected start:stop:count, got {text!r}")
    return np.linspace(lo, hi, count)


def _common(parser: argparse.ArgumentParser, threads: bool = False) -> None:
    parser.add_argument("--out", default="-", help="output path, '-' for stdout (default)")
    if threads:
        parser.add_argument("--threads", type=_positive_int, default=1, help="worker threads; results do not depend on it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tracedensity", description="Deletion-channel density maps and decks.")
    parser.add_argument("--version", action="version", version=f"tracedensity {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    g = sub.add_parser("gen", help="sample traces of a source")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--source", type=_bits_arg)
    src.add_argument("--random", type=_positive_int, metavar="N", help="draw a uniform random source of length N")
    g.add_argument("--p", type=_prob_arg, required=True)
    g.add_argument("--t", dest="T", type=_positive_int, required=True, help="number of traces")
    g.add_argument("--seed", type=_seed_arg, required=True)
    _common(g, threads=True)

    o = sub.add_parser("oracle", help="exact trace statistics by enumeration (n <= 16)")
    o.add_argument("--source", type=_bits_arg, required=True)
    o.add_argument("--p", type=_prob_arg, required=True)
    o.add_argument("--k", type=int, required=True)
    o.add_argument("--table", choices=("position", "occurrence"), default="position")
    _common(o)

    for name, what in (("density", "density map"), ("deck", "k-subword deck")):
        grp = sub.add_parser(name, help=f"exact or estimated {what}")
        modes = grp.add_subparsers(dest="action", required=True, metavar="{exact,estimate}")
        ex = modes.add_parser("exact")
        ex.add_argument("--source", type=_bits_arg, required=True)
        ex.add_argument("--k", type=int, required=True)
        if name == "density":
            ex.add_argument("--p", type=_prob_arg, required=True)
        _common(ex)
        est = modes.add_parser("estimate")
        est.add_argument("--traces", required=True, help="traces file written by 'gen'")
        est.add_argument("--k", type=int, required=True)
        est.add_argument("--p", type=_prob_arg, help="deletion probability (default: from the traces header)")
        if name == "deck":
            est.add_argument("--mode", choices=("full", "truncated"), default="full")
        _common(est, threads=True)

    d = sub.add_parser("distinguish", help="pick the candidate whose density map is nearest the estimate")
    d.add_argument("--traces", required=True)
    d.add_argument("--candidates", required=True, help="comma-separated candidate sources")
    d.add_argument("--k", type=int, required=True)
    d.add_argument("--p", type=_prob_arg)
    _common(d, threads=True)

    r = sub.add_parser("reconstruct", help="recover a source from a deck or density map")
    rmodes = r.add_subparsers(dest="action", required=True, metavar="{merge,ridge,debruijn}")
    m = rmodes.add_parser("merge")
    m.add_argument("--deck", required=True)
    m.add_argument("--n", type=_positive_int, required=True)
    _common(m)
    rr = rmodes.add_parser("ridge")
    rr.add_argument("--density", required=True)
    rr.add_argument("--p", type=_prob_arg, required=True)
    rr.add_argument("--lam", type=float, default=1e-3)
    rr.add_argument("--tau", type=float, default=0.5)
    _common(rr)
    db = rmodes.add_parser("debruijn")
    db.add_argument("--deck", required=True)
    db.add_argument("--limit", type=_positive_int, default=2)
    db.add_argument("--format", choices=("paths", "dot"), default="paths")
    _common(db)

    b = sub.add_parser("bounds", help="tabulate the bound exponents over a (p, c) grid")
    b.add_argument("--c", type=_float_list, default=[0.5, 1.0, 2.0])
    b.add_argument("--p-grid", type=_grid_arg, default="0.005:0.495:99")
    b.add_argument("--n", type=float, default=1000.0)
    _common(b)

    bu = sub.add_parser("budget", help="trace count sufficient for an estimation task")
    bu.add_argument("--kind", choices=("entry", "map", "deck-truncated", "deck-full"), required=True)
    bu.add_argument("--n", type=int, required=True)
    kc = bu.add_mutually_exclusive_group(required=True)
    kc.add_argument("--k", type=int)
    kc.add_argument("--c", type=float)
    bu.add_argument("--p", type=float, required=True)
    bu.add_argument("--eps", type=float)
    bu.add_argument("--delta", type=float, required=True)
    _common(bu)

    v = sub.add_parser("verify", help="run an oracle-backed identity suite")
    v.add_argument("--suite", choices=sorted(SUITES), required=True)
    v.add_argument("--n", type=int, help="lemma1: restrict sources to this length")
    v.add_argument("--p", type=_prob_arg, help="lemma1: restrict to this deletion probability")
    v.add_argument("--trials", type=_positive_int, help="distinguish: number of seeded trials")
    v.add_argument("--seed", type=_seed_arg, help="seed for randomized suites")
    _common(v, threads=True)
    return parser


def _load_traces(path: str) -> TraceSet:
    with open(path, encoding="ascii") as fh:
        return read_traces(fh)


def _traces_params(cfg: ExperimentConfig, ts: TraceSet) -> None:
    if cfg.p is None:
        cfg.p = ts.params.p
    cfg.extra.update({"traces_n": ts.n, "traces_p": ts.params.p, "traces_seed": ts.params.seed,
                      "traces_T": ts.count})


def _cmd_gen(a, cfg: ExperimentConfig, out: io.StringIO) -> None:
    if a.source is not None:
        s = a.source
    else:
        rng = np.random.default_rng(np.random.SeedSequence((a.seed, _SOURCE_STREAM)))
        s = BitString.from_bits(rng.integers(0, 2, a.random))
    write_traces(sample_traces(s, ChannelParams(a.p, a.seed), a.T, workers=a.threads), out)


def _cmd_oracle(a, cfg, out) -> None:
    stats = exact_statistics(a.source, a.p, a.k)
    cfg.extra["table"] = a.table
    out.write(cfg.header())
    if a.table == "position":
        out.write("y,i,probability\n")
        for (y, i) in sorted(stats.position_probs, key=lambda key: (len(key[0]), key[0], key[1])):
            out.write(f"{y},{i},{format_float(stats.position_probs[(y, i)])}\n")
    else:
        out.write("y,mean\n")
        for y in sorted(stats.occurrence_means, key=lambda t: (len(t), t)):
            out.write(f"{y},{format_float(stats.occurrence_means[y])}\n")


def _cmd_density(a, cfg, out) -> None:
    if a.action == "exact":
        dm = exact_density_map(a.source, a.k, a.p)
    else:
        ts = _load_traces(a.traces)
        _traces_params(cfg, ts)
        dm = estimate_density_map(ts, a.k, cfg.p, workers=a.threads)
    write_density_csv(dm, out, cfg.header())


def _cmd_deck(a, cfg, out) -> None:
    if a.action == "exact":
        deck = exact_deck(a.source, a.k)
    else:
        ts = _load_traces(a.traces)
        _traces_params(cfg, ts)
        deck = estimate_deck(ts, a.k, cfg.p, mode=a.mode, workers=a.threads)
    write_deck_tsv(deck, out, cfg.header())


def _cmd_distinguish(a, cfg, out) -> None:
    try:
        cands = [parse_bits(c) for c in a.candidates.split(",")]
    except TraceDensityError as exc:
        raise _UsageError(f"--candidates: {exc}") from None
    if len(cands) < 2:
        raise _UsageError("--candidates: need at least two candidates")
    ts = _load_traces(a.traces)
    _traces_params(cfg, ts)
    dists = candidate_distances(estimate_density_map(ts, a.k, cfg.p, workers=a.threads), cands, cfg.p)
    best = min(range(len(cands)), key=lambda j: (dists[j], cands[j].text, j))
    out.write(cfg.header())
    out.write("index,candidate,linf_distance,chosen\n")
    for j, (c, dist) in enumerate(zip(cands, dists)):
        out.write(f"{j},{c.text},{format_float(dist)},{int(j == best)}\n")


def _cmd_reconstruct(a, cfg, out) -> None:
    if a.action == "ridge":
        with open(a.density, encoding="ascii") as fh:
            dm = read_density_csv(fh)
        cfg.n, cfg.k = dm.n, dm.k
        s = ridge_reconstruct(dm, dm.n, dm.k, a.p, a.lam, a.tau)
        out.write(cfg.header() + s.text + "\n")
        return
    with open(a.deck, encoding="ascii") as fh:
        deck = read_deck_tsv(fh)
    cfg.k = deck.k
    if a.action == "merge":
        out.write(cfg.header() + merge_reconstruct(deck, a.n).text + "\n")
        return
    graph = build_debruijn(deck)
    if a.format == "dot":
        # Graphviz skips lines that start with '#'
        out.write(cfg.header() + graph.to_dot())
        return
    paths = eulerian_paths(graph, a.limit)
    cfg.extra["paths_found"] = len(paths)
    out.write(cfg.header())
    out.write("".join(p.text + "\n" for p in paths))


def _cmd_bounds(a, cfg, out) -> None:
    cfg.extra["c_values"] = ",".join(format_float(c) for c in a.c)
    cfg.extra["p_grid"] = f"{format_float(a.p_grid[0])}:{format_float(a.p_grid[-1])}:{len(a.p_grid)}"
    reports = [bound_functions(c, float(p), a.n) for p in a.p_grid for c in a.c]
    write_bounds_csv(reports, out, cfg.header())


def _cmd_budget(a, cfg, out) -> None:
    if a.n < 2:
        raise _UsageError("--n: must be at least 2")
    c = a.c if a.c is not None else c_for(a.k, a.n)
    cfg.c = c
    if a.kind in ("entry", "map"):
        if a.eps is None:
            raise _UsageError(f"--eps: required for --kind {a.kind}")
        value = traces_needed(a.kind, a.n, c, a.p, a.eps, a.delta)
    else:
        value = deck_traces_needed(a.n, c, a.p, a.delta, mode=a.kind.split("-")[1])
    out.write(cfg.header() + f"{value}\n")


def _cmd_verify(a, cfg, out) -> int:
    kwargs = {}
    if a.suite == "lemma1":
        if a.n is not None:
            kwargs["n"] = a.n
        if a.p is not None:
            kwargs["p"] = a.p
    elif a.n is not None or a.p is not None:
        raise _UsageError("--n/--p: only the lemma1 suite takes them")
    if a.trials is not None:
        if a.suite != "distinguish":
            raise _UsageError("--trials: only the distinguish suite takes it")
        kwargs["trials"] = a.trials
    if a.suite == "distinguish":
        kwargs["workers"] = a.threads
    if a.seed is not None:
        if a.suite not in ("lemma1", "deck-identity", "truncation", "distinguish"):
            raise _UsageError(f"--seed: suite {a.suite} is not randomized")
        kwargs["seed"] = a.seed
    res = SUITES[a.suite](**kwargs)
    out.write(cfg.header())
    out.write(res.summary() + "\n")
    for key, value in sorted(res.detail.items()):
        out.write(f"{key}={value}\n")
    return 0 if res.passed else 1


_COMMANDS = {
    "gen": _cmd_gen,
    "oracle": _cmd_oracle,
    "density": _cmd_density,
    "deck": _cmd_deck,
    "distinguish": _cmd_distinguish,
    "reconstruct": _cmd_reconstruct,
    "bounds": _cmd_bounds,
    "budget": _cmd_budget,
    "verify": _cmd_verify,
}


def _config(a) -> ExperimentConfig:
    command = a.command + (f" {a.action}" if getattr(a, "action", None) else "")
    cfg = ExperimentConfig(command=command, threads=getattr(a, "threads", 1), out=a.out)
    for f in fields(ExperimentConfig):
        if f.name in ExperimentConfig._silent:
            continue
        value = getattr(a, f.name, None)
        if isinstance(value, BitString):
            value = value.text
        elif f.name in _INPUT_FILES and value is not None:
            # file name only, so outputs do not depend on where the inputs live
            value = Path(value).name
        if value is not None and not isinstance(value, (list, np.ndarray)):
            setattr(cfg, f.name, value)
    if a.command == "gen" and a.random is not None:
        cfg.extra["random_length"] = a.random
    return cfg


def _emit(text: str, target: str) -> None:
    if target == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(target).write_text(text, encoding="ascii")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse ``argv``, run the command and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    cfg = _config(args)
    out = io.StringIO()
    try:
        status = _COMMANDS[args.command](args, cfg, out) or 0
        _emit(out.getvalue(), args.out)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"tracedensity: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"tracedensity: error: {exc.strerror or exc}: {exc.filename or ''}".rstrip(": "), file=sys.stderr)
        return 1
    except (TraceDensityError, ValueError, ArithmeticError) as exc:
        print(f"tracedensity: error: {exc}", file=sys.stderr)
        return 1
    return status


def main() -> None:
    sys.exit(run())
