"""Permutations and partial permutations as point sets in [n]^2.

A permutation sigma is identified with the n points (i, sigma(i)); two
permutations intersect when they agree somewhere. Indices are 1-based,
Lehmer ranks are 0-based and follow lexicographic order of the one-line
notation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import permutations as _iter_perms
from math import factorial
from typing import Iterable, Iterator, NamedTuple, Union

import numpy as np

from .errors import ColCollision, MismatchedGround, OutOfRange, RowCollision

# n! rows of n int8 entries; 10! * 10 bytes is the largest table we keep
MAX_TABLE_N = 10


class Point(NamedTuple):
    row: int
    col: int

    def __str__(self) -> str:
        return f"{self.row}->{self.col}"


def _check_point(n: int, p: Point) -> None:
    if not (1 <= p.row <= n and 1 <= p.col <= n):
        raise OutOfRange(f"point {tuple(p)} outside [{n}]^2")


@dataclass(frozen=True)
class PartialPermutation:
    """Points with pairwise distinct rows and columns, sorted by row."""

    n: int
    points: tuple[Point, ...]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)

    def __contains__(self, p) -> bool:
        return Point(*p) in self.pointset

    def __str__(self) -> str:
        return format_partial(self)

    @cached_property
    def pointset(self) -> frozenset[Point]:
        return frozenset(self.points)

    @property
    def rows(self) -> frozenset[int]:
        return frozenset(p.row for p in self.points)

    @property
    def cols(self) -> frozenset[int]:
        return frozenset(p.col for p in self.points)

    def issubset(self, other: PointSetLike) -> bool:
        return self.pointset <= point_set(other)

    def union(self, other: PointSetLike) -> PartialPermutation:
        return make_partial(self.n, self.pointset | point_set(other))

    def difference(self, other: PointSetLike) -> PartialPermutation:
        return PartialPermutation(self.n, tuple(p for p in self.points if p not in point_set(other)))


@dataclass(frozen=True)
class Permutation:
    """A bijection of [n]; ``map[i-1]`` is the image of i."""

    map: tuple[int, ...]

    def __post_init__(self):
        n = len(self.map)
        if sorted(self.map) != list(range(1, n + 1)):
            raise OutOfRange(f"{self.map} is not a permutation of [{n}]")

    @property
    def n(self) -> int:
        return len(self.map)

    def __call__(self, i: int) -> int:
        return self.map[i - 1]

    def __len__(self) -> int:
        return len(self.map)

    def __iter__(self) -> Iterator[Point]:
        return (Point(i + 1, c) for i, c in enumerate(self.map))

    def __contains__(self, p) -> bool:
        r, c = p
        return 1 <= r <= self.n and self.map[r - 1] == c

    def __str__(self) -> str:
        return format_permutation(self)

    @cached_property
    def rank(self) -> int:
        return rank(self)

    @cached_property
    def pointset(self) -> frozenset[Point]:
        return frozenset(self)

    def as_partial(self) -> PartialPermutation:
        return PartialPermutation(self.n, tuple(self))


PointSetLike = Union[Permutation, PartialPermutation, Iterable]


def point_set(obj) -> frozenset[Point]:
    if isinstance(obj, (Permutation, PartialPermutation)):
        return obj.pointset
    return frozenset(Point(*p) for p in obj)


def make_partial(n: int, points: Iterable) -> PartialPermutation:
    pts = sorted({Point(*p) for p in points})
    rows, cols = set(), set()
    for p in pts:
        _check_point(n, p)
        if p.row in rows:
            raise RowCollision(f"row {p.row} used twice")
        if p.col in cols:
            raise ColCollision(f"column {p.col} used twice")
        rows.add(p.row)
        cols.add(p.col)
    return PartialPermutation(n, tuple(pts))


def alpha(i: int, j: int, n: int) -> PartialPermutation:
    """Identity segment {(i,i), ..., (j,j)}."""
    if not 1 <= i <= j <= n:
        raise OutOfRange(f"need 1 <= i <= j <= n, got i={i} j={j} n={n}")
    return PartialPermutation(n, tuple(Point(x, x) for x in range(i, j + 1)))


def identity(n: int) -> Permutation:
    return Permutation(tuple(range(1, n + 1)))


def cycle_shift(n: int) -> Permutation:
    """The standard n-cycle i -> i+1 (mod n)."""
    return Permutation(tuple(i % n + 1 for i in range(1, n + 1)))


def _ground(obj) -> int | None:
    return getattr(obj, "n", None)


def intersects(a: PointSetLike, b: PointSetLike) -> bool:
    na, nb = _ground(a), _ground(b)
    if na is not None and nb is not None and na != nb:
        raise MismatchedGround(f"ground sizes differ: {na} vs {nb}")
    if isinstance(a, Permutation) and isinstance(b, Permutation):
        return any(x == y for x, y in zip(a.map, b.map))
    return not point_set(a).isdisjoint(point_set(b))


def support(sigma: Permutation) -> frozenset[int]:
    return frozenset(i + 1 for i, c in enumerate(sigma.map) if c != i + 1)


def compose(sigma: Permutation, rho: Permutation) -> Permutation:
    """(sigma o rho)(i) = sigma(rho(i))."""
    if sigma.n != rho.n:
        raise MismatchedGround(f"ground sizes differ: {sigma.n} vs {rho.n}")
    return Permutation(tuple(sigma.map[r - 1] for r in rho.map))


def inverse(sigma: Permutation) -> Permutation:
    inv = [0] * sigma.n
    for i, c in enumerate(sigma.map, start=1):
        inv[c - 1] = i
    return Permutation(tuple(inv))


def rank(sigma: Permutation | Iterable[int]) -> int:
    m = sigma.map if isinstance(sigma, Permutation) else tuple(sigma)
    n = len(m)
    r = 0
    for i in range(n):
        smaller = sum(1 for j in range(i + 1, n) if m[j] < m[i])
        r += smaller * factorial(n - 1 - i)
    return r


def unrank(n: int, r: int) -> Permutation:
    if n < 0 or not 0 <= r < factorial(n):
        raise OutOfRange(f"rank {r} outside [0, {n}!)")
    pool = list(range(1, n + 1))
    out = []
    for i in range(n - 1, -1, -1):
        q, r = divmod(r, factorial(i))
        out.append(pool.pop(q))
    return Permutation(tuple(out))


def extensions(p: PartialPermutation) -> Iterator[Permutation]:
    """All permutations containing ``p``, in rank order."""
    n = p.n
    fixed = {pt.row: pt.col for pt in p.points}
    taken = set(fixed.values())
    free_cols = [c for c in range(1, n + 1) if c not in taken]
    current: list[int] = []
    used: set[int] = set()

    def walk(row: int):
        if row > n:
            yield Permutation(tuple(current))
            return
        if row in fixed:
            current.append(fixed[row])
            yield from walk(row + 1)
            current.pop()
            return
        for c in free_cols:
            if c in used:
                continue
            used.add(c)
            current.append(c)
            yield from walk(row + 1)
            current.pop()
            used.discard(c)

    yield from walk(1)


@lru_cache(maxsize=None)
def perm_table(n: int) -> np.ndarray:
    """All of S_n in rank order as an (n!, n) int8 array, 1-based images."""
    if not 0 <= n <= MAX_TABLE_N:
        raise OutOfRange(f"permutation table supports 0 <= n <= {MAX_TABLE_N}")
    table = np.array(list(_iter_perms(range(1, n + 1))), dtype=np.int8).reshape(factorial(n), n)
    table.setflags(write=False)
    return table


def rank_rows(arr: np.ndarray) -> np.ndarray:
    """Vectorised Lehmer rank of each row of a (m, n) array of permutations."""
    arr = np.asarray(arr)
    m, n = arr.shape
    out = np.zeros(m, dtype=np.int64)
    for i in range(n - 1):
        smaller = (arr[:, i + 1:] < arr[:, i:i + 1]).sum(axis=1)
        out += smaller.astype(np.int64) * factorial(n - 1 - i)
    return out


def count_partials(n: int, s: int) -> int:
    """Number of partial permutations of size s on [n]^2 by direct enumeration."""
    from itertools import combinations

    cells = [Point(r, c) for r in range(1, n + 1) for c in range(1, n + 1)]
    total = 0
    for combo in combinations(cells, s):
        if len({p.row for p in combo}) == s and len({p.col for p in combo}) == s:
            total += 1
    return total


# -- text formats ------------------------------------------------------------

def format_permutation(sigma: Permutation) -> str:
    return " ".join(str(c) for c in sigma.map)


def parse_permutation(text: str) -> Permutation:
    try:
        return Permutation(tuple(int(tok) for tok in text.split()))
    except ValueError as exc:
        raise OutOfRange(f"cannot parse permutation {text!r}") from exc


def format_partial(p: PartialPermutation) -> str:
    return ",".join(f"{pt.row}->{pt.col}" for pt in p.points)


def parse_partial(text: str, n: int) -> PartialPermutation:
    points = []
    for tok in filter(None, (t.strip() for t in text.split(","))):
        left, sep, right = tok.partition("->")
        if not sep:
            raise OutOfRange(f"bad point {tok!r}, expected r->c")
        points.append(Point(int(left), int(right)))
    return make_partial(n, points)
