"""Significance-tested ranking graphs over a set of systems.

An edge ``winner -> loser`` is drawn when an exact two-sided sign test on the
non-draw ratings of that pair rejects equality at level ``alpha``. Draws are
dropped before testing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Mapping

from .core import Outcome, SystemPair
from .errors import CyclicGraph, InconsistentPairSet, InvalidInput

DEFAULT_ALPHA = 0.05


def sign_test_exact(d_plus: int, d_minus: int) -> Fraction:
    """Two-sided exact sign test p-value as a fraction."""
    if d_plus < 0 or d_minus < 0:
        raise InvalidInput(f"win/loss counts must be non-negative, got ({d_plus}, {d_minus})")
    n = d_plus + d_minus
    if n == 0:
        return Fraction(1)
    k = max(d_plus, d_minus)
    tail = sum(comb(n, i) for i in range(k, n + 1))
    return min(Fraction(1), Fraction(2 * tail, 2**n))


def sign_test(d_plus: int, d_minus: int) -> float:
    return float(sign_test_exact(d_plus, d_minus))


@dataclass(frozen=True)
class RankingGraph:
    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]
    alpha: float = DEFAULT_ALPHA
    p_values: Mapping[tuple[str, str], float] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "edges", frozenset(self.edges))
        seen: set[frozenset[str]] = set()
        for u, v in self.edges:
            if u == v:
                raise InvalidInput(f"self edge on {u!r}")
            if u not in self.nodes or v not in self.nodes:
                raise InvalidInput(f"edge {u!r} -> {v!r} references an unknown node")
            key = frozenset((u, v))
            if key in seen:
                raise InvalidInput(f"more than one edge between {u!r} and {v!r}")
            seen.add(key)

    def successors(self) -> dict[str, list[str]]:
        succ: dict[str, list[str]] = {n: [] for n in sorted(self.nodes)}
        for u, v in sorted(self.edges):
            succ[u].append(v)
        return succ

    def topological_order(self) -> list[str]:
        """Kahn's algorithm with lexicographic tie-breaking; raises on cycles."""
        succ = self.successors()
        indeg = {n: 0 for n in succ}
        for _, v in self.edges:
            indeg[v] += 1
        ready = sorted(n for n, d in indeg.items() if d == 0)
        order: list[str] = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for v in succ[n]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    ready.append(v)
                    ready.sort()
        if len(order) != len(self.nodes):
            raise CyclicGraph("ranking graph contains a cycle")
        return order

    def reachability(self) -> dict[str, frozenset[str]]:
        succ = self.successors()
        reach: dict[str, frozenset[str]] = {}
        for n in reversed(self.topological_order()):
            acc: set[str] = set()
            for v in succ[n]:
                acc.add(v)
                acc |= reach[v]
            reach[n] = frozenset(acc)
        return reach


def build_dag(outcomes: Mapping[SystemPair, Outcome], alpha: float = DEFAULT_ALPHA) -> RankingGraph:
    """Sign-test every pair and orient significant edges toward the loser."""
    if not 0 < alpha < 1:
        raise InvalidInput(f"alpha must lie in (0, 1), got {alpha!r}")
    by_key: dict[frozenset[str], tuple[SystemPair, Outcome]] = {}
    for pair, outcome in outcomes.items():
        key = pair.key()
        if key in by_key:
            raise InconsistentPairSet(f"duplicate outcome for pair {pair}", pair=str(pair))
        by_key[key] = (pair, outcome)
    nodes = sorted({s for key in by_key for s in key})
    for a, b in combinations(nodes, 2):
        if frozenset((a, b)) not in by_key:
            raise InconsistentPairSet(f"no outcome for pair {a} vs {b}", pair=f"{a} vs {b}")

    edges = set()
    p_values: dict[tuple[str, str], float] = {}
    for pair, outcome in by_key.values():
        p = sign_test_exact(outcome.d_plus, outcome.d_minus)
        p_values[(pair.first, pair.second)] = float(p)
        if p < Fraction(alpha):
            edge = (pair.first, pair.second) if outcome.d_plus > outcome.d_minus else (pair.second, pair.first)
            edges.add(edge)
    graph = RankingGraph(frozenset(nodes), frozenset(edges), alpha, p_values)
    graph.topological_order()
    return graph


def omit_transitive_edges(g: RankingGraph) -> RankingGraph:
    """Transitive reduction: drop every edge implied by a longer path."""
    reach = g.reachability()
    succ = g.successors()
    kept = set()
    for u, v in g.edges:
        if not any(v in reach[w] for w in succ[u] if w != v):
            kept.add((u, v))
    return RankingGraph(g.nodes, frozenset(kept), g.alpha, g.p_values)


def _quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_dot(g: RankingGraph, name: str = "ranking") -> str:
    """Deterministic Graphviz text: sorted nodes, then sorted edges, LF endings."""
    lines = [f"digraph {name} {{"]
    lines += [f"  {_quote(n)};" for n in sorted(g.nodes)]
    lines += [f"  {_quote(u)} -> {_quote(v)};" for u, v in sorted(g.edges)]
    lines.append("}")
    return "\n".join(lines) + "\n"
