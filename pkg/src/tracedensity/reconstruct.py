"""Recovering a source string from a deck or a density map.

Three back-ends:

* de Bruijn analysis of a deck: every source with that deck spells an
  Eulerian path, enumerated here up to a limit;
* greedy merging of k-mers, valid when no (k-1)-mer repeats in the source;
* ridge inversion of a density map followed by weighted voting over
  positions. How the per-k-mer solutions are combined into bits is our own
  choice: each (k-mer, position) whose solved indicator reaches ``tau``
  votes for its bits with weight equal to that indicator value, and exact
  ties go to 0.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .bitstring import BitString
from .channel import kernel_matrix
from .deck import Deck
from .density import DensityMap, kmer_from_code
from .errors import EmptyDeck, LengthMismatch, RepeatDetected, ShapeMismatch, SolveFailure

__all__ = [
    "DeBruijnGraph",
    "build_debruijn",
    "eulerian_paths",
    "merge_reconstruct",
    "ridge_indicators",
    "ridge_reconstruct",
]


@dataclass
class DeBruijnGraph:
    """Multigraph on (k-1)-mers with one edge per k-mer occurrence in the deck."""

    k: int
    edges: Counter = field(default_factory=Counter)

    @property
    def nodes(self) -> set[str]:
        out = set()
        for e in self.edges:
            out.add(e[:-1])
            out.add(e[1:])
        return out

    def edge_count(self) -> int:
        return sum(self.edges.values())

    def out_degree(self, node: str) -> int:
        return self.edges.get(node + "0", 0) + self.edges.get(node + "1", 0)

    def in_degree(self, node: str) -> int:
        return self.edges.get("0" + node, 0) + self.edges.get("1" + node, 0)

    def to_dot(self, name: str = "debruijn") -> str:
        lines = [f"digraph {name} {{"]
        for node in sorted(self.nodes):
            lines.append(f'  "{node}" [label="{node}"];')
        for e in sorted(self.edges):
            lines.append(f'  "{e[:-1]}" -> "{e[1:]}" [label="{e} x{self.edges[e]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_debruijn(deck: Deck) -> DeBruijnGraph:
    if deck.k < 2:
        raise ValueError("k must be at least 2")
    edges = Counter({kmer_from_code(c, deck.k).text: int(v) for c, v in enumerate(deck.counts) if v > 0})
    if not edges:
        raise EmptyDeck("deck has no k-mer with a positive count")
    return DeBruijnGraph(deck.k, edges)


def _weakly_connected(graph: DeBruijnGraph) -> bool:
    nodes = graph.nodes
    adj = {v: set() for v in nodes}
    for e in graph.edges:
        adj[e[:-1]].add(e[1:])
        adj[e[1:]].add(e[:-1])
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(nodes)


def _start_nodes(graph: DeBruijnGraph) -> list[str]:
    plus, minus = [], []
    for v in graph.nodes:
        bal = graph.out_degree(v) - graph.in_degree(v)
        if bal == 1:
            plus.append(v)
        elif bal == -1:
            minus.append(v)
        elif bal != 0:
            return []
    if not plus and not minus:
        return sorted(v for v in graph.nodes if graph.out_degree(v))
    if len(plus) == 1 and len(minus) == 1:
        return plus
    return []


def eulerian_paths(graph: DeBruijnGraph, limit: int) -> list[BitString]:
    """Up to ``limit`` distinct strings spelled by Eulerian paths, in lexicographic order.

    Returns an empty list when no Eulerian path exists.
    """
    if limit < 1:
        raise ValueError("limit must be at least 1")
    if not graph.edges or not _weakly_connected(graph):
        return []
    total = graph.edge_count()
    remaining = dict(graph.edges)
    found: list[str] = []
    for start in _start_nodes(graph):
        # explicit DFS; each frame is (node, next branch bit to try)
        spelled = list(start)
        stack = [[start, 0]]
        used = 0
        while stack and len(found) < limit:
            frame = stack[-1]
            node, branch = frame
            if used == total:
                found.append("".join(spelled))
            advanced = False
            while frame[1] < 2 and used < total:
                bit = "01"[frame[1]]
                frame[1] += 1
                edge = node + bit
                if remaining.get(edge, 0) > 0:
                    remaining[edge] -= 1
                    used += 1
                    spelled.append(bit)
                    stack.append([edge[1:], 0])
                    advanced = True
                    break
            if advanced:
                continue
            stack.pop()
            if stack:
                prev = stack[-1][0]
                remaining[prev + spelled.pop()] += 1
                used -= 1
        if len(found) >= limit:
            break
    return [BitString.from_text(t) for t in sorted(found)[:limit]]


def merge_reconstruct(deck: Deck, n: int) -> BitString:
    """Chain k-mers on their (k-1)-overlaps; requires a source with no repeated (k-1)-mer."""
    graph = build_debruijn(deck)
    for e, mult in graph.edges.items():
        if mult > 1:
            raise RepeatDetected(f"k-mer {e} occurs {mult} times")
    sources = []
    for v in graph.nodes:
        if graph.out_degree(v) > 1 or graph.in_degree(v) > 1:
            raise RepeatDetected(f"(k-1)-mer {v} has in/out degree above 1")
        if graph.in_degree(v) == 0:
            sources.append(v)
    if not sources:
        raise RepeatDetected("k-mers close a cycle, so the first (k-1)-mer repeats")
    if len(sources) > 1:
        raise LengthMismatch(f"deck splits into {len(sources)} disjoint chains")
    node = sources[0]
    spelled = [node]
    while graph.out_degree(node):
        bit = "0" if graph.edges.get(node + "0") else "1"
        spelled.append(bit)
        node = node[1:] + bit
    text = "".join(spelled)
    if len(text) != n:
        raise LengthMismatch(f"merged string has length {len(text)}, expected {n}")
    return BitString.from_text(text)


def ridge_indicators(density: DensityMap, p: float, lam: float) -> np.ndarray:
    """Solve ``(F^T F + lam I) I_x = F^T K_x`` for every k-mer at once.

    Returns an array shaped like ``density.values``.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    F = kernel_matrix(density.n, density.k, p)
    gram = F.T @ F + lam * np.eye(F.shape[1])
    try:
        factor = linalg.cho_factor(gram)
        solution = linalg.cho_solve(factor, F.T @ density.values.T)
    except (linalg.LinAlgError, ValueError) as exc:
        raise SolveFailure(f"ridge system could not be solved (lambda={lam}): {exc}") from exc
    if not np.all(np.isfinite(solution)):
        raise SolveFailure("ridge solve produced non-finite values")
    return solution.T


def ridge_reconstruct(density: DensityMap, n: int, k: int, p: float, lam: float = 1e-3,
                      tau: float = 0.5) -> BitString:
    """Reconstruct the source from a (possibly estimated) density map.

    Parameters
    ----------
    density : DensityMap
        Map with shape matching ``(n, k)``.
    lam : float
        Ridge penalty; must be positive.
    tau : float
        Solved indicator values below ``tau`` cast no vote.
    """
    if density.n != n or density.k != k:
        raise ShapeMismatch(f"map has (n={density.n}, k={density.k}), expected (n={n}, k={k})")
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    ind = ridge_indicators(density, p, lam)
    weights = np.where(ind >= tau, ind, 0.0)
    votes = np.zeros((2, n))
    codes = np.arange(1 << k)
    width = n - k + 1
    for r in range(k):
        bit = (codes >> (k - 1 - r)) & 1
        for b in (0, 1):
            votes[b, r:r + width] += weights[bit == b].sum(axis=0)
    return BitString.from_bits(votes[1] > votes[0])
