"""Brute-force extremal intersecting families for tiny n.

Intersecting families are cliques of the graph on S_n whose edges join
permutations that agree somewhere. The search is branch-and-bound with a
greedy-colouring bound on size and a point-avoidance bound on diversity.
Vertices are Lehmer ranks; vertex sets are Python int bitsets.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import factorial

import numpy as np

from .errors import OutOfRange, TooLarge
from .family import PermFamily, _pairs_meet, are_isomorphic, build_E, is_intersecting, stats
from .perm import perm_table

GRAPH_MAX_N = 6
SEARCH_MAX_N = 5
DEFAULT_BUDGET = 20_000_000


@dataclass(frozen=True)
class IntersectionGraph:
    n: int
    adjacency: tuple[int, ...]  # bitset of neighbours per vertex
    point_masks: tuple[int, ...]  # bitset of vertices through point (x, y), index (x-1)*n + (y-1)

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    def degree(self, v: int) -> int:
        return self.adjacency[v].bit_count()

    def neighbours(self, v: int) -> list[int]:
        return _bits(self.adjacency[v])


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _to_mask(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << int(i)
    return m


def build_intersection_graph(n: int) -> IntersectionGraph:
    if not 1 <= n <= GRAPH_MAX_N:
        raise TooLarge(f"intersection graph limited to n <= {GRAPH_MAX_N}")
    table = perm_table(n)
    meet = _pairs_meet(table, table)
    np.fill_diagonal(meet, False)
    adjacency = tuple(_to_mask(np.flatnonzero(row)) for row in meet)
    points = tuple(
        _to_mask(np.flatnonzero(table[:, x] == y + 1)) for x in range(n) for y in range(n)
    )
    return IntersectionGraph(n, adjacency, points)


def _colour_order(graph: IntersectionGraph, cand: int) -> list[tuple[int, int]]:
    """Greedy sequential colouring of ``cand``; returns (vertex, colour) pairs
    in non-decreasing colour order."""
    adj = graph.adjacency
    out = []
    colour = 0
    uncoloured = cand
    while uncoloured:
        colour += 1
        avail = uncoloured
        while avail:
            low = avail & -avail
            v = low.bit_length() - 1
            avail &= ~adj[v] & ~low
            uncoloured &= ~low
            out.append((v, colour))
    return out


@dataclass
class SearchResult:
    n: int
    min_diversity: int
    max_size: int | None  # None when no family reaches the diversity
    witness: PermFamily | None
    exact: bool
    nodes: int


def max_intersecting(n: int, min_diversity: int = 0, budget: int = DEFAULT_BUDGET,
                     graph: IntersectionGraph | None = None) -> SearchResult:
    """Largest intersecting family with diversity >= ``min_diversity``.

    The graph is vertex-transitive (left multiplication preserves both
    intersection and diversity), so the search only explores cliques through
    the identity. When ``budget`` nodes are exhausted the best family found
    so far is returned with ``exact=False``.
    """
    if not 1 <= n <= SEARCH_MAX_N:
        raise TooLarge(f"exact search limited to n <= {SEARCH_MAX_N}")
    if min_diversity < 0:
        raise OutOfRange("diversity threshold must be non-negative")
    g = graph or build_intersection_graph(n)
    adj, pmask = g.adjacency, g.point_masks
    table = perm_table(n)
    # point index of each vertex's n points
    vpoints = [tuple(x * n + int(table[v, x]) - 1 for x in range(n)) for v in range(g.vertex_count)]
    npts = n * n
    deg = [0] * npts
    clique: list[int] = []
    best = {"size": 0, "members": None}
    nodes = 0
    exhausted = False

    def gamma_now() -> int:
        return len(clique) - max(deg)

    def expand(cand: int):
        nonlocal nodes, exhausted
        nodes += 1
        if nodes > budget:
            exhausted = True
            return
        size = len(clique)
        if size > best["size"] and gamma_now() >= min_diversity:
            best["size"], best["members"] = size, list(clique)
        if not cand:
            return
        # final diversity <= members avoiding x, for every point x
        div_cap = min(size - deg[i] + (cand & ~pmask[i]).bit_count() for i in range(npts))
        if div_cap < min_diversity:
            return
        order = _colour_order(g, cand)
        for v, colour in reversed(order):
            if size + colour <= best["size"] or exhausted:
                return
            clique.append(v)
            for i in vpoints[v]:
                deg[i] += 1
            expand(cand & adj[v])
            for i in vpoints[v]:
                deg[i] -= 1
            clique.pop()
            cand &= ~(1 << v)

    root = 0  # identity
    clique.append(root)
    for i in vpoints[root]:
        deg[i] += 1
    expand(adj[root])
    if best["members"] is None:
        return SearchResult(n, min_diversity, None, None, not exhausted, nodes)
    witness = PermFamily.from_ranks(n, best["members"])
    return SearchResult(n, min_diversity, best["size"], witness, not exhausted, nodes)


def maximal_cliques(graph: IntersectionGraph):
    """Bron-Kerbosch with pivoting over the whole graph, as rank lists."""
    adj = graph.adjacency

    def bk(r: list[int], p: int, x: int):
        if not p and not x:
            yield list(r)
            return
        px = p | x
        pivot = max(_bits(px), key=lambda u: (p & adj[u]).bit_count())
        for v in _bits(p & ~adj[pivot]):
            r.append(v)
            yield from bk(r, p & adj[v], x & adj[v])
            r.pop()
            p &= ~(1 << v)
            x |= 1 << v

    yield from bk([], (1 << graph.vertex_count) - 1, 0)


def maximum_witnesses(n: int, min_diversity: int) -> tuple[int | None, list[PermFamily]]:
    """Every maximum intersecting family with the given diversity floor.

    Extending an intersecting family never lowers its diversity, so the
    optimum is attained on maximal cliques and scanning them is exhaustive.
    Practical for n <= 4 only.
    """
    if n > 4:
        raise TooLarge("full witness enumeration is limited to n <= 4")
    g = build_intersection_graph(n)
    best, found = None, []
    for clique in maximal_cliques(g):
        F = PermFamily.from_ranks(n, clique)
        if stats(F).diversity < min_diversity:
            continue
        if best is None or len(F) > best:
            best, found = len(F), [F]
        elif len(F) == best:
            found.append(F)
    if best is None:
        return None, []
    # an optimum inside a larger clique would extend without losing diversity
    return best, found


def isomorphic_E_index(F: PermFamily) -> int | None:
    for k in range(2, F.n - 1):
        E = build_E(F.n, k)
        if len(E) == len(F) and are_isomorphic(E, F) is not None:
            return k
    return None


@dataclass
class FrontierRow:
    min_diversity: int
    max_family_size: int
    witness_diversity: int
    witness_ranks: list[int]
    isomorphic_to_E_k: int | None
    exact: bool
    nodes: int


@dataclass
class ExtremalReport:
    n: int
    frontier: list[FrontierRow]
    ekr_max: int
    max_diversity: int
    diversity_upper_bound: int
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "ekr_max": self.ekr_max,
            "max_diversity": self.max_diversity,
            "diversity_upper_bound": self.diversity_upper_bound,
            "frontier": [row.__dict__ for row in self.frontier],
        })

    def to_tsv(self) -> str:
        lines = ["min_diversity\tmax_family_size\twitness_diversity\tisomorphic_to_E_k\texact\tnodes"]
        for r in self.frontier:
            iso = "-" if r.isomorphic_to_E_k is None else str(r.isomorphic_to_E_k)
            lines.append(f"{r.min_diversity}\t{r.max_family_size}\t{r.witness_diversity}\t{iso}\t"
                         f"{str(r.exact).lower()}\t{r.nodes}")
        return "\n".join(lines) + "\n"


def frontier(n: int, budget: int = DEFAULT_BUDGET) -> ExtremalReport:
    """Maximum family size for each diversity floor until none is reachable."""
    if not 1 <= n <= SEARCH_MAX_N:
        raise TooLarge(f"frontier limited to n <= {SEARCH_MAX_N}")
    g = build_intersection_graph(n)
    rows = []
    gamma = 0
    while True:
        res = max_intersecting(n, gamma, budget=budget, graph=g)
        if res.max_size is None:
            break
        st = stats(res.witness)
        assert is_intersecting(res.witness) and st.diversity >= gamma
        rows.append(FrontierRow(gamma, res.max_size, st.diversity, [int(r) for r in res.witness.ranks()],
                                isomorphic_E_index(res.witness), res.exact, res.nodes))
        gamma += 1
    # large-n ceiling (n-2)! - (n-3)!, reported for comparison only
    cap = factorial(n - 2) - factorial(n - 3) if n >= 3 else 0
    return ExtremalReport(n, rows, rows[0].max_family_size if rows else 0,
                          rows[-1].witness_diversity if rows else 0, cap)
