"""Inclusion-minimal hitting sets for families of partial permutations.

The search keeps a partial hitting set and always branches on the points
of the first member it misses. A minimal hitting set of size i is reached
by a path of exactly i such choices, so with members of size at most s
there are at most s**i of them.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyFamily, PreconditionViolation
from .family import PermFamily, stats
from .perm import Point, point_set

PointSet = frozenset  # of Point


@dataclass
class HittingSetReport:
    t: int | None
    by_size: dict[int, list[tuple[Point, ...]]]
    bound_by_size: dict[int, int]
    witness_chain: list[int]
    nodes_by_depth: dict[int, int]
    has_empty_member: bool = False
    common_points: tuple[Point, ...] = ()
    notes: list[str] = field(default_factory=list)

    def counts(self) -> dict[int, int]:
        return {i: len(v) for i, v in sorted(self.by_size.items())}

    def all_sets(self) -> list[tuple[Point, ...]]:
        return [s for i in sorted(self.by_size) for s in self.by_size[i]]

    def to_json(self) -> str:
        return json.dumps(
            {
                "t": self.t,
                "counts": {str(i): c for i, c in self.counts().items()},
                "bounds": {str(i): b for i, b in sorted(self.bound_by_size.items())},
                "sets": [[[p.row, p.col] for p in s] for s in self.all_sets()],
            },
            sort_keys=False,
        )


def _normalise(family: Iterable) -> list[tuple[Point, ...]]:
    return [tuple(sorted(point_set(m))) for m in family]


def minimal_hitting_sets(family: Sequence, max_size: int, t: int | None = None) -> HittingSetReport:
    """All inclusion-minimal hitting sets of size <= ``max_size``.

    A member with no points cannot be hit; the report then lists nothing and
    sets ``has_empty_member``.
    """
    members = _normalise(family)
    if not members:
        raise EmptyFamily("hitting sets of an empty family")
    sets_ = [frozenset(m) for m in members]
    common = frozenset.intersection(*sets_)
    width = max(len(m) for m in members)
    bounds = {i: width ** i for i in range(1, max_size + 1)}
    if t is not None:
        bounds = {i: (t - 2) ** i for i in range(1, max_size + 1)}

    if any(not m for m in members):
        return HittingSetReport(t, {}, bounds, [], {}, has_empty_member=True,
                                common_points=tuple(sorted(common)))

    found: set[frozenset] = set()
    chain: list[int] = []
    nodes: dict[int, int] = {}

    def search(chosen: tuple[Point, ...], chosen_set: frozenset):
        nodes[len(chosen)] = nodes.get(len(chosen), 0) + 1
        for idx, m in enumerate(sets_):
            if chosen_set.isdisjoint(m):
                break
        else:
            found.add(chosen_set)
            return
        if idx not in chain:
            chain.append(idx)
        if len(chosen) == max_size:
            return
        for p in members[idx]:
            search(chosen + (p,), chosen_set | {p})

    search((), frozenset())

    # the branching can reach supersets of minimal sets; keep the minimal ones
    ordered = sorted(found, key=lambda s: (len(s), sorted(s)))
    minimal: list[frozenset] = []
    for s in ordered:
        if not any(m < s for m in minimal):
            minimal.append(s)
    by_size: dict[int, list[tuple[Point, ...]]] = {}
    for s in minimal:
        by_size.setdefault(len(s), []).append(tuple(sorted(s)))
    return HittingSetReport(t, by_size, bounds, chain, dict(sorted(nodes.items())),
                            common_points=tuple(sorted(common)))


def brute_minimal_hitting_sets(family: Sequence, ground: Iterable, max_size: int) -> set[frozenset]:
    """Subset-lattice reference: scan every subset of ``ground`` up to ``max_size``."""
    sets_ = [frozenset(point_set(m)) for m in family]
    ground = sorted(point_set(ground))
    out = set()
    for size in range(max_size + 1):
        for combo in combinations(ground, size):
            c = frozenset(combo)
            if not all(c & m for m in sets_):
                continue
            # hitting is monotone, so dropping single points settles minimality
            if all(not all((c - {p}) & m for m in sets_) for p in c):
                out.add(c)
    return out


def grid(lo: int, hi: int) -> list[Point]:
    return [Point(r, c) for r in range(lo, hi + 1) for c in range(lo, hi + 1)]


@dataclass
class BoundCheck:
    holds: bool
    t: int
    counts: dict[int, int]
    bounds: dict[int, int]
    no_singletons: bool
    report: HittingSetReport


def hitting_bound_check(family: Sequence, t: int) -> BoundCheck:
    """Check count(i) <= (t-2)^i for 2 <= i <= t-1 on members in [2,t]^2.

    Members larger than t-2 violate the precondition. A non-empty common
    intersection is not an error: the 1-hitting sets it produces are
    reported through ``no_singletons=False``.
    """
    members = _normalise(family)
    if not members:
        raise EmptyFamily("bound check on an empty family")
    for m in members:
        if len(m) > t - 2:
            raise PreconditionViolation(f"member of size {len(m)} exceeds t-2={t - 2}")
        if any(not (2 <= p.row <= t and 2 <= p.col <= t) for p in m):
            raise PreconditionViolation(f"member {m} leaves [2,{t}]^2")
    report = minimal_hitting_sets(members, max_size=max(1, t - 1), t=t)
    counts = report.counts()
    bounds = {i: (t - 2) ** i for i in range(2, t)}
    holds = all(counts.get(i, 0) <= b for i, b in bounds.items())
    return BoundCheck(holds, t, counts, bounds, counts.get(1, 0) == 0, report)


def diversity_fragments(F: PermFamily, t: int | None = None) -> tuple[list[tuple[Point, ...]], int]:
    """Strip the diversity part of ``F`` down to partial permutations on [2,t]^2.

    Keeps members moving 1, removes their common intersection and the points
    in row 1 or column 1. With ``t`` omitted it is n minus the size of the
    common intersection.
    """
    n = F.n
    arr = F.array()
    moved = F.__class__.from_ranks(n, F.ranks()[arr[:, 0] != 1])
    if not moved:
        raise EmptyFamily("no member moves 1")
    common = stats(moved).common_intersection.pointset
    if t is None:
        t = n - len(common)
    frags = []
    for sigma in moved:
        pts = [p for p in sigma if p not in common and p.row != 1 and p.col != 1
               and 2 <= p.row <= t and 2 <= p.col <= t]
        frags.append(tuple(pts))
    return frags, t


def random_instance(rng: np.random.Generator, t: int, members: int, max_len: int) -> list[tuple[Point, ...]]:
    """Random family of non-empty partial permutations on [2,t]^2."""
    out = []
    labels = np.arange(2, t + 1)
    for _ in range(members):
        size = int(rng.integers(1, max_len + 1))
        rows = rng.choice(labels, size=size, replace=False)
        cols = rng.choice(labels, size=size, replace=False)
        out.append(tuple(sorted(Point(int(r), int(c)) for r, c in zip(rows, cols))))
    return out
