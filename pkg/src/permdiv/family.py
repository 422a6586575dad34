"""Permutation families over a fixed n, stored as masks over Lehmer ranks.

Builds the filtered families Sigma[X, Y-bar], the diversity kernel H_k,
the neighbourhood N(G), their union E_k, and answers degree/diversity,
intersection, closure and isomorphism queries.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import EmptyInput, MismatchedGround, NotIntersecting, OutOfRange
from .perm import (
    PartialPermutation,
    Permutation,
    Point,
    alpha,
    make_partial,
    parse_permutation,
    perm_table,
    point_set,
    rank_rows,
)

_CHUNK = 1 << 21  # cap on broadcast cells per block in pairwise checks


class PermFamily:
    """Immutable set of permutations of [n].

    ``members`` is a read-only boolean mask of length n!; bit r is set when
    the permutation of rank r belongs to the family.
    """

    __slots__ = ("n", "members", "cached_size")

    def __init__(self, n: int, members: np.ndarray):
        members = np.asarray(members, dtype=bool)
        if members.shape != (factorial(n),):
            raise MismatchedGround(f"mask of shape {members.shape} for n={n}")
        if members.flags.writeable:
            members = members.copy()
            members.setflags(write=False)
        self.n = n
        self.members = members
        self.cached_size = int(np.count_nonzero(members))

    @classmethod
    def empty(cls, n: int) -> PermFamily:
        return cls(n, np.zeros(factorial(n), dtype=bool))

    @classmethod
    def full(cls, n: int) -> PermFamily:
        return cls(n, np.ones(factorial(n), dtype=bool))

    @classmethod
    def from_ranks(cls, n: int, ranks: Iterable[int]) -> PermFamily:
        mask = np.zeros(factorial(n), dtype=bool)
        idx = np.fromiter((int(r) for r in ranks), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= mask.size):
            raise OutOfRange(f"rank outside [0, {n}!)")
        mask[idx] = True
        return cls(n, mask)

    @classmethod
    def from_perms(cls, n: int, perms: Iterable[Permutation]) -> PermFamily:
        ranks = []
        for p in perms:
            if p.n != n:
                raise MismatchedGround(f"permutation of size {p.n} in family over n={n}")
            ranks.append(p.rank)
        return cls.from_ranks(n, ranks)

    def __len__(self) -> int:
        return self.cached_size

    def __bool__(self) -> bool:
        return self.cached_size > 0

    def __iter__(self) -> Iterator[Permutation]:
        table = perm_table(self.n)
        for r in self.ranks():
            yield Permutation(tuple(int(x) for x in table[r]))

    def __contains__(self, sigma: Permutation) -> bool:
        return sigma.n == self.n and bool(self.members[sigma.rank])

    def __eq__(self, other) -> bool:
        if not isinstance(other, PermFamily):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.members, other.members)

    def __hash__(self) -> int:
        return hash((self.n, np.packbits(self.members).tobytes()))

    def __repr__(self) -> str:
        return f"PermFamily(n={self.n}, size={self.cached_size})"

    def ranks(self) -> np.ndarray:
        return np.flatnonzero(self.members)

    def array(self) -> np.ndarray:
        """Members as a (size, n) int8 array in rank order."""
        return perm_table(self.n)[self.members]

    def _check(self, other: PermFamily) -> None:
        if self.n != other.n:
            raise MismatchedGround(f"ground sizes differ: {self.n} vs {other.n}")

    def __or__(self, other: PermFamily) -> PermFamily:
        self._check(other)
        return PermFamily(self.n, self.members | other.members)

    def __and__(self, other: PermFamily) -> PermFamily:
        self._check(other)
        return PermFamily(self.n, self.members & other.members)

    def __sub__(self, other: PermFamily) -> PermFamily:
        self._check(other)
        return PermFamily(self.n, self.members & ~other.members)

    def isdisjoint(self, other: PermFamily) -> bool:
        self._check(other)
        return not np.any(self.members & other.members)

    def issubset(self, other: PermFamily) -> bool:
        self._check(other)
        return not np.any(self.members & ~other.members)

    def restrict(self, x) -> PermFamily:
        """F[X]: members containing every point of ``x``."""
        return PermFamily(self.n, self.members & _contains_mask(self.n, point_set(x)))

    def quotient(self, x) -> list[frozenset[Point]]:
        """F(X) = {F minus X : X subset of F} as point sets."""
        xs = point_set(x)
        return [p.pointset - xs for p in self.restrict(xs)]

    def with_bit_flipped(self, r: int) -> PermFamily:
        """Copy with membership of rank ``r`` toggled (fault-injection hook)."""
        mask = self.members.copy()
        mask[r] = not mask[r]
        return PermFamily(self.n, mask)


# -- constraint masks --------------------------------------------------------

def _contains_mask(n: int, pts) -> np.ndarray:
    table = perm_table(n)
    mask = np.ones(table.shape[0], dtype=bool)
    for p in pts:
        _in_ground(n, p)
        mask &= table[:, p.row - 1] == p.col
    return mask


def _hits_mask(n: int, pts) -> np.ndarray:
    table = perm_table(n)
    mask = np.zeros(table.shape[0], dtype=bool)
    for p in pts:
        _in_ground(n, p)
        mask |= table[:, p.row - 1] == p.col
    return mask


def _in_ground(n: int, p: Point) -> None:
    if not (1 <= p.row <= n and 1 <= p.col <= n):
        raise MismatchedGround(f"point {tuple(p)} outside [{n}]^2")


def _ground_of(obj, n: int) -> None:
    m = getattr(obj, "n", n)
    if m != n:
        raise MismatchedGround(f"constraint over n={m} used with n={n}")


def sigma_filter(
    n: int,
    contains=(),
    avoids=(),
    intersect_each: Sequence = (),
    avoid_each: Sequence = (),
) -> PermFamily:
    """Permutations containing ``contains``, missing every point of ``avoids``,
    disjoint from each object of ``avoid_each`` and meeting each object of
    ``intersect_each``.

    ``avoids`` is an arbitrary point set (it need not be a partial
    permutation). An unsatisfiable combination yields the empty family.
    """
    for obj in (contains, avoids, *intersect_each, *avoid_each):
        _ground_of(obj, n)
    mask = _contains_mask(n, point_set(contains))
    mask &= ~_hits_mask(n, point_set(avoids))
    for a in avoid_each:
        mask &= ~_hits_mask(n, point_set(a))
    for g in intersect_each:
        mask &= _hits_mask(n, point_set(g))
    return PermFamily(n, mask)


def brute_filter(n: int, contains=(), avoids=(), intersect_each=(), avoid_each=()) -> PermFamily:
    """Slow reference for ``sigma_filter``: one Python loop over S_n."""
    from itertools import permutations

    c, y = point_set(contains), point_set(avoids)
    inter = [point_set(g) for g in intersect_each]
    avoid = [point_set(a) for a in avoid_each]
    keep = []
    for r, images in enumerate(permutations(range(1, n + 1))):
        pts = {Point(i + 1, v) for i, v in enumerate(images)}
        if not c <= pts or pts & y:
            continue
        if any(pts & a for a in avoid):
            continue
        if all(pts & g for g in inter):
            keep.append(r)
    return PermFamily.from_ranks(n, keep)


def star(n: int, row: int = 1, col: int = 1) -> PermFamily:
    return sigma_filter(n, contains=make_partial(n, [(row, col)]))


def derangements(n: int, sigma: Permutation | None = None) -> PermFamily:
    """D_n, or the permutations disjoint from ``sigma`` when given."""
    from .perm import identity

    return sigma_filter(n, avoid_each=[sigma or identity(n)])


def _check_k(n: int, k: int) -> None:
    if not 2 <= k <= n - 2:
        raise OutOfRange(f"need 2 <= k <= n-2, got n={n} k={k}")


def build_H(n: int, k: int) -> PermFamily:
    """Permutations fixing k+1..n pointwise and moving 1."""
    _check_k(n, k)
    return sigma_filter(n, contains=alpha(k + 1, n, n), avoids=[Point(1, 1)])


def neighborhood_N(n: int, G: PermFamily) -> PermFamily:
    """Permutations fixing 1 that meet every member of ``G``."""
    if G.n != n:
        raise MismatchedGround(f"family over n={G.n} used with n={n}")
    if not G:
        raise EmptyInput("neighbourhood of an empty family")
    st = star(n)
    cand = st.array()
    ok = np.ones(len(cand), dtype=bool)
    g_arr = G.array()
    step = max(1, _CHUNK // max(1, len(cand) * n))
    for lo in range(0, len(g_arr), step):
        block = g_arr[lo:lo + step]
        meets = (cand[:, None, :] == block[None, :, :]).any(axis=2)
        ok &= meets.all(axis=1)
    return PermFamily.from_ranks(n, st.ranks()[ok])


def build_E(n: int, k: int) -> PermFamily:
    H = build_H(n, k)
    return H | neighborhood_N(n, H)


def hilton_milner(n: int, sigma: Permutation) -> PermFamily:
    """{sigma} together with the permutations fixing 1 that meet sigma."""
    if sigma(1) == 1:
        raise OutOfRange("sigma must move 1")
    base = sigma_filter(n, contains=make_partial(n, [(1, 1)]), intersect_each=[sigma])
    return base | PermFamily.from_perms(n, [sigma])


# -- statistics --------------------------------------------------------------

@dataclass(frozen=True)
class FamilyStats:
    size: int
    max_degree: int
    max_degree_point: Point | None
    diversity: int
    common_intersection: PartialPermutation | None


def degree_matrix(F: PermFamily) -> np.ndarray:
    """(n, n) array; entry [x-1, y-1] is |F[(x, y)]|."""
    n = F.n
    arr = F.array().astype(np.int64) - 1
    deg = np.zeros((n, n), dtype=np.int64)
    for row in range(n):
        deg[row] = np.bincount(arr[:, row], minlength=n)
    return deg


def stats(F: PermFamily) -> FamilyStats:
    """Size, maximum point degree, diversity and common intersection.

    For the empty family there is no maximum-degree point and no common
    intersection; both are reported as None.
    """
    if not F:
        return FamilyStats(0, 0, None, 0, None)
    deg = degree_matrix(F)
    flat = int(np.argmax(deg))  # first maximum in canonical (row, col) order
    x, y = divmod(flat, F.n)
    common = [Point(r + 1, c + 1) for r, c in zip(*np.nonzero(deg == len(F)))]
    return FamilyStats(
        size=len(F),
        max_degree=int(deg[x, y]),
        max_degree_point=Point(x + 1, y + 1),
        diversity=len(F) - int(deg[x, y]),
        common_intersection=make_partial(F.n, common),
    )


def diversity(F: PermFamily) -> int:
    return stats(F).diversity


def _pairs_meet(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Boolean (len(a), len(b)) matrix: do rows agree in some position."""
    n = a.shape[1] if a.size else 1
    out = np.empty((len(a), len(b)), dtype=bool)
    step = max(1, _CHUNK // max(1, len(b) * n))
    for lo in range(0, len(a), step):
        out[lo:lo + step] = (a[lo:lo + step, None, :] == b[None, :, :]).any(axis=2)
    return out


def is_intersecting(F: PermFamily) -> bool:
    if len(F) < 2:
        return True
    arr = F.array()
    return bool(_pairs_meet(arr, arr).all())


def first_disjoint_pair(F: PermFamily) -> tuple[Permutation, Permutation] | None:
    arr = F.array()
    if len(arr) < 2:
        return None
    bad = np.argwhere(~_pairs_meet(arr, arr))
    if not len(bad):
        return None
    i, j = bad[0]
    return (Permutation(tuple(int(v) for v in arr[i])), Permutation(tuple(int(v) for v in arr[j])))


def maximal_closure(F: PermFamily) -> PermFamily:
    """Extend an intersecting family to an inclusion-maximal one.

    Candidates are scanned once in rank order and kept when they meet every
    member accepted so far; a rejected candidate misses some member, and
    members are never removed, so one pass reaches the fixpoint.
    """
    if not F:
        raise EmptyInput("closure of the empty family is not defined")
    if not is_intersecting(F):
        raise NotIntersecting("closure needs an intersecting family")
    table = perm_table(F.n)
    mask = F.members.copy()
    # candidates must meet every original member
    cand = np.flatnonzero(~mask & _pairs_meet(table, F.array()).all(axis=1))
    accepted: list[int] = []
    for r in cand:
        row = table[r]
        if accepted and not (table[accepted] == row).any(axis=1).all():
            continue
        accepted.append(int(r))
    mask[accepted] = True
    return PermFamily(F.n, mask)


def are_isomorphic(F: PermFamily, G: PermFamily) -> tuple[Permutation, Permutation] | None:
    """Find (pi, rho) with G = {pi o sigma o rho : sigma in F}, else None."""
    if F.n != G.n:
        raise MismatchedGround(f"ground sizes differ: {F.n} vs {G.n}")
    if len(F) != len(G):
        return None
    if not F:
        from .perm import identity

        return identity(F.n), identity(F.n)
    if sorted(degree_matrix(F).ravel()) != sorted(degree_matrix(G).ravel()):
        return None
    n = F.n
    table = perm_table(n)
    f_arr = F.array().astype(np.int64)
    g_arr = G.array().astype(np.int64)
    target = G.members
    for rho in table.astype(np.int64):
        f_rho = f_arr[:, rho - 1]  # sigma o rho
        first = f_rho[0]
        for g in g_arr:
            pi = np.empty(n, dtype=np.int64)
            pi[first - 1] = g
            image = pi[f_rho - 1]
            ranks = rank_rows(image)
            if target[ranks].all():
                return (Permutation(tuple(int(v) for v in pi)), Permutation(tuple(int(v) for v in rho)))
    return None


def translate(F: PermFamily, pi: Permutation, rho: Permutation) -> PermFamily:
    """The family pi F rho."""
    arr = F.array().astype(np.int64)
    p = np.array(pi.map, dtype=np.int64)
    image = p[arr[:, np.array(rho.map) - 1] - 1]
    return PermFamily.from_ranks(F.n, rank_rows(image))


# -- serialisation -----------------------------------------------------------

def dumps_text(F: PermFamily) -> str:
    lines = [f"n={F.n} size={len(F)}"]
    lines.extend(" ".join(str(int(v)) for v in row) for row in F.array())
    return "\n".join(lines) + "\n"


def loads_text(text: str) -> PermFamily:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise OutOfRange("empty family file")
    header = dict(tok.split("=", 1) for tok in lines[0].split())
    n, size = int(header["n"]), int(header["size"])
    F = PermFamily.from_perms(n, (parse_permutation(ln) for ln in lines[1:]))
    if len(F) != size or len(lines) - 1 != size:
        raise OutOfRange(f"header says size={size}, found {len(lines) - 1} lines")
    return F


def dumps_ranks(F: PermFamily) -> bytes:
    """Little-endian unsigned 64-bit ranks in increasing order."""
    return F.ranks().astype("<u8").tobytes()


def loads_ranks(data: bytes, n: int) -> PermFamily:
    if len(data) % 8:
        raise OutOfRange("rank list length is not a multiple of 8 bytes")
    return PermFamily.from_ranks(n, np.frombuffer(data, dtype="<u8").astype(np.int64))


def parse_family(literal: str) -> PermFamily:
    """Family literals: ``E:n:k``, ``H:n:k``, ``star:n:r:c``, ``sigma:n``,
    ``file:path`` (text format) and ``ranks:n:path`` (binary ranks)."""
    kind, _, rest = literal.partition(":")
    parts = rest.split(":")
    try:
        if kind == "E":
            n, k = map(int, parts)
            return build_E(n, k)
        if kind == "H":
            n, k = map(int, parts)
            return build_H(n, k)
        if kind == "star":
            n, r, c = map(int, parts)
            return star(n, r, c)
        if kind == "sigma":
            (n,) = map(int, parts)
            return PermFamily.full(n)
        if kind == "ranks":
            n, _, path = rest.partition(":")
            with open(path, "rb") as fh:
                return loads_ranks(fh.read(), int(n))
        if kind == "file":
            with open(rest, encoding="utf-8") as fh:
                return loads_text(fh.read())
    except ValueError as exc:
        if isinstance(exc, OutOfRange):
            raise
        raise OutOfRange(f"bad family literal {literal!r}") from exc
    raise OutOfRange(f"unknown family literal {literal!r}")
