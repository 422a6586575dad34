"""Spreadness, homogeneity and the peeling decomposition of a family.

Families are handled as lists of point sets (``frozenset`` of ``Point``);
``PermFamily`` inputs are converted on entry and rebuilt on exit. All
thresholds are exact ``Fraction`` comparisons.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import factorial
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyFamily, NotSpread, NotSubfamily, OutOfRange, TooLarge
from .family import PermFamily
from .perm import Point, point_set

Members = list  # list[frozenset[Point]]


def _key(points: Iterable[Point]) -> tuple[Point, ...]:
    return tuple(sorted(points))


def as_members(F) -> Members:
    if isinstance(F, PermFamily):
        return [p.pointset for p in F]
    return [frozenset(point_set(m)) for m in F]


def subset_counts(members: Members, skip: frozenset = frozenset(), max_size: int | None = None) -> Counter:
    """|F[X]| for every X contained in some member, X disjoint from ``skip``."""
    counts: Counter = Counter()
    for m in members:
        pts = _key(m - skip)
        top = len(pts) if max_size is None else min(max_size, len(pts))
        for s in range(top + 1):
            counts.update(combinations(pts, s))
    return counts


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise OutOfRange(f"bad rational {text!r}") from exc


def fmt_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# -- ambient families --------------------------------------------------------

@dataclass(frozen=True)
class AmbientSpace:
    """All bijections rows -> cols that contain the partial permutation ``fixed``."""

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    fixed: frozenset = frozenset()

    @classmethod
    def sigma(cls, m: int, fixed: Iterable = ()) -> AmbientSpace:
        labels = tuple(range(1, m + 1))
        return cls(labels, labels, frozenset(point_set(fixed)))

    @classmethod
    def grid(cls, lo: int, hi: int, fixed: Iterable = ()) -> AmbientSpace:
        labels = tuple(range(lo, hi + 1))
        return cls(labels, labels, frozenset(point_set(fixed)))

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def size(self) -> int:
        return factorial(self.m - len(self.fixed))

    def is_partial(self, pts: frozenset) -> bool:
        rows = {p.row for p in pts}
        cols = {p.col for p in pts}
        return (len(rows) == len(pts) == len(cols)
                and rows <= set(self.rows) and cols <= set(self.cols))

    def quotient_size(self, s: Iterable) -> int:
        """|A(S)|: members of A containing S."""
        pts = self.fixed | point_set(s)
        if not self.is_partial(pts):
            return 0
        return factorial(self.m - len(pts))

    def restricted(self, s: Iterable) -> AmbientSpace:
        return AmbientSpace(self.rows, self.cols, self.fixed | point_set(s))

    def admits(self, member: frozenset) -> bool:
        return self.fixed <= member and self.is_partial(member)

    def describe(self) -> str:
        fixed = ",".join(str(p) for p in _key(self.fixed))
        return f"Sigma[{self.rows[0]}..{self.rows[-1]}]" + (f"[{fixed}]" if fixed else "")


# -- spreadness --------------------------------------------------------------

@dataclass
class SpreadCheck:
    ok: bool
    witness: tuple[Point, ...] | None
    worst_ratio: Fraction  # max over X of |F[X]| r^{|X|} / |F|
    exact: bool = True


def is_r_spread(F, r) -> SpreadCheck:
    """|F[X]| / |F| <= r^{-|X|} for every non-empty X inside some member."""
    members = as_members(F)
    if not members:
        raise EmptyFamily("spreadness of an empty family")
    r = _as_fraction(r)
    total = len(members)
    worst, witness = Fraction(0), None
    for x, c in subset_counts(members).items():
        if not x:
            continue
        ratio = Fraction(c, total) * r ** len(x)
        if ratio > worst:
            worst, witness = ratio, x
    return SpreadCheck(worst <= 1, witness if worst > 1 else None, worst)


def spreadness(F) -> float:
    """Largest r for which F is r-spread, as a float."""
    members = as_members(F)
    total = len(members)
    best = math.inf
    for x, c in subset_counts(members).items():
        if x:
            best = min(best, (total / c) ** (1 / len(x)))
    return best


@dataclass
class RQSpreadCheck:
    ok: bool
    witness_s: tuple[Point, ...] | None
    witness_x: tuple[Point, ...] | None
    checked_s: int
    exact: bool


def is_rq_spread(A, r, q, budget: int = 5_000_000, seed: int = 0, samples: int = 2000) -> RQSpreadCheck:
    """Every quotient A(S) with |S| <= q is r-spread.

    Exhaustive when the subset enumeration fits ``budget``. Beyond that a
    ``PermFamily`` is checked on ``samples`` seeded random (S, Y) pairs and
    the result is flagged inexact; other inputs raise TooLarge.
    """
    members = None if isinstance(A, PermFamily) else as_members(A)
    size = len(A) if members is None else len(members)
    if not size:
        raise EmptyFamily("spreadness of an empty family")
    r = _as_fraction(r)
    q = int(math.floor(q))
    width = A.n if members is None else max(len(m) for m in members)
    if size * 2 ** width > budget:
        if members is not None:
            raise TooLarge("(r,q)-spread check exceeds the enumeration budget")
        return _sampled_rq(A, r, q, seed, samples)
    if members is None:
        members = as_members(A)
    counts = subset_counts(members)
    checked = set()
    for y, cy in counts.items():
        for s_size in range(0, min(q, len(y) - 1) + 1):
            for s in combinations(y, s_size):
                checked.add(s)
                # |A(S)(Y minus S)| r^{|Y minus S|} <= |A(S)|
                if cy * r ** (len(y) - s_size) > counts[s]:
                    return RQSpreadCheck(False, s, tuple(p for p in y if p not in s), len(checked), True)
    return RQSpreadCheck(True, None, None, len(checked), True)


def _sampled_rq(A: PermFamily, r: Fraction, q: int, seed: int, samples: int) -> RQSpreadCheck:
    from .family import _contains_mask

    rng = np.random.default_rng(seed)
    ranks = A.ranks()
    table_members = A.array()
    for _ in range(samples):
        row = table_members[rng.integers(len(ranks))]
        pts = [Point(i + 1, int(c)) for i, c in enumerate(row)]
        order = rng.permutation(len(pts))
        s_size = int(rng.integers(0, min(q, len(pts) - 1) + 1))
        y_size = int(rng.integers(s_size + 1, len(pts) + 1))
        s = tuple(sorted(pts[i] for i in order[:s_size]))
        y = tuple(sorted(pts[i] for i in order[:y_size]))
        cs = int(np.count_nonzero(A.members & _contains_mask(A.n, s)))
        cy = int(np.count_nonzero(A.members & _contains_mask(A.n, y)))
        if cy * r ** (y_size - s_size) > cs:
            return RQSpreadCheck(False, s, tuple(p for p in y if p not in s), samples, False)
    return RQSpreadCheck(True, None, None, samples, False)


# -- homogeneity -------------------------------------------------------------

@dataclass
class HomogeneityCheck:
    ok: bool
    witness: tuple[Point, ...] | None
    worst_ratio: Fraction  # max of lhs/rhs; ok iff <= 1


def _check_subfamily(members: Members, A: AmbientSpace) -> None:
    for m in members:
        if not A.admits(m):
            raise NotSubfamily(f"member {_key(m)} is not in {A.describe()}")


def is_homogeneous(F, A: AmbientSpace, tau) -> HomogeneityCheck:
    """|F[S]|/|F| <= tau^{|S|} |A[S]|/|A| for every S off the fixed part of A."""
    members = as_members(F)
    if not members:
        raise EmptyFamily("homogeneity of an empty family")
    _check_subfamily(members, A)
    tau = _as_fraction(tau)
    total, a_total = len(members), A.size
    worst, witness = Fraction(0), None
    for s, c in subset_counts(members, skip=A.fixed).items():
        if not s:
            continue
        lhs = Fraction(c * a_total)
        rhs = tau ** len(s) * A.quotient_size(s) * total
        ratio = lhs / rhs
        if ratio > worst:
            worst, witness = ratio, s
    return HomogeneityCheck(worst <= 1, witness if worst > 1 else None, worst)


def _qualifies(count: int, s_len: int, quotient: int, a_total: int, total: int, tau: Fraction) -> bool:
    return count * a_total >= tau ** s_len * quotient * total


def find_maximal_qualifying_set(F, A: AmbientSpace, tau) -> tuple[Point, ...]:
    """An inclusion-maximal S with |F[S]| >= tau^{|S|} (|A[S]|/|A|) |F|.

    Grows S from the empty set by the smallest qualifying single point; when
    no single point qualifies but a larger superset does, jumps to the
    smallest such superset (by size, then point order) and keeps growing.
    """
    members = as_members(F)
    if not members:
        raise EmptyFamily("qualifying set of an empty family")
    _check_subfamily(members, A)
    return _maximal_qualifying(members, subset_counts(members, skip=A.fixed), A, _as_fraction(tau))


def _maximal_qualifying(members: Members, counts: Counter, A: AmbientSpace, tau: Fraction) -> tuple[Point, ...]:
    total, a_total = len(members), A.size

    def ok(s: tuple[Point, ...]) -> bool:
        c = counts.get(s, 0)
        return c > 0 and _qualifies(c, len(s), A.quotient_size(s), a_total, total, tau)

    qualifying = [s for s in counts if ok(s)]
    current: tuple[Point, ...] = ()
    while True:
        cur = set(current)
        supersets = [s for s in qualifying if len(s) > len(current) and cur.issubset(s)]
        if not supersets:
            return current
        step = [s for s in supersets if len(s) == len(current) + 1]
        pool = step or supersets
        current = min(pool, key=lambda s: (len(s), sorted(set(s) - cur), s))


# -- decomposition -----------------------------------------------------------

@dataclass
class SpreadDecomposition:
    covers: list  # list of (S, F_S) with F_S in the input's family type
    residual: object
    tau: Fraction
    q: int
    ambient: AmbientSpace
    input_size: int
    stop_set: tuple[Point, ...] | None = None
    verdicts: dict = field(default_factory=dict)

    def residual_size(self) -> int:
        return len(self.residual)

    def residual_bound(self) -> Fraction:
        return Fraction(self.ambient.size) / self.tau ** (self.q + 1)

    def to_json(self) -> str:
        return json.dumps(
            {
                "tau": fmt_fraction(self.tau),
                "q": self.q,
                "ambient": self.ambient.describe(),
                "input_size": self.input_size,
                "covers": [{"S": [[p.row, p.col] for p in s], "size": len(fam)} for s, fam in self.covers],
                "residual_size": self.residual_size(),
                "residual_bound": fmt_fraction(self.residual_bound()),
                "homogeneity_verified": self.verdicts.get("homogeneity"),
                "verdicts": self.verdicts,
            }
        )


def _wrap(template, n_or_none, members: Members):
    if isinstance(template, PermFamily):
        from .perm import Permutation

        perms = (Permutation(tuple(c for _, c in sorted(m))) for m in members)
        return PermFamily.from_perms(template.n, perms)
    return list(members)


def spread_approximate(F, A: AmbientSpace, tau, q: int) -> SpreadDecomposition:
    """Peel F into cover sets of size <= q plus a residual.

    Round j finds a maximal qualifying S_j for the current family; if
    |S_j| > q the current family is the residual, otherwise every member
    containing S_j is peeled off as F_j[S_j].
    """
    members = as_members(F)
    if not members:
        raise EmptyFamily("decomposition of an empty family")
    _check_subfamily(members, A)
    tau = _as_fraction(tau)
    if tau <= 1:
        raise OutOfRange("tau must exceed 1")
    if q < 0:
        raise OutOfRange("q must be non-negative")
    current = sorted(members, key=_key)
    covers = []
    stop = None
    while current:
        counts = subset_counts(current, skip=A.fixed)
        s = _maximal_qualifying(current, counts, A, tau)
        if len(s) > q:
            stop = s
            break
        sset = frozenset(s)
        peeled = [m for m in current if sset <= m]
        current = [m for m in current if not sset <= m]
        covers.append((s, _wrap(F, None, peeled)))
    return SpreadDecomposition(covers, _wrap(F, None, current), tau, q, A, len(members), stop)


def verify_decomposition(F, dec: SpreadDecomposition) -> dict:
    """Exhaustively re-check the decomposition's guarantees."""
    members = {frozenset(m) for m in as_members(F)}
    peeled = [as_members(fam) for _, fam in dec.covers]
    residual = as_members(dec.residual)
    parts = [frozenset(m) for p in peeled for m in p] + [frozenset(m) for m in residual]
    partition = len(parts) == len(members) and set(parts) == members
    containment = all(frozenset(s) <= m for (s, _), p in zip(dec.covers, peeled) for m in p)
    cover_sizes = all(len(s) <= dec.q for s, _ in dec.covers)
    homogeneous = all(
        is_homogeneous(p, dec.ambient.restricted(s), dec.tau).ok for (s, _), p in zip(dec.covers, peeled)
    )
    bound = len(residual) * dec.tau ** (dec.q + 1) <= dec.ambient.size
    verdicts = {
        "partition": partition,
        "containment": containment,
        "cover_sizes": cover_sizes,
        "homogeneity": homogeneous,
        "residual_bound": bound,
    }
    dec.verdicts = verdicts
    return verdicts


def cross_intersecting(S1: Sequence, S2: Sequence) -> bool:
    """Every set of S1 meets every set of S2; vacuous if either is empty."""
    a = [point_set(x) for x in S1]
    b = [point_set(y) for y in S2]
    return all(not x.isdisjoint(y) for x in a for y in b)


@dataclass
class DualRun:
    first: SpreadDecomposition
    second: SpreadDecomposition
    cross_intersecting: bool
    inputs_cross_intersecting: bool


def dual_approximation(F1, A1: AmbientSpace, tau1, q1: int, F2, A2: AmbientSpace, tau2, q2: int) -> DualRun:
    """Approximate two families separately and measure whether the cover
    families still cross-intersect. This is reported, not enforced.
    """
    d1 = spread_approximate(F1, A1, tau1, q1)
    d2 = spread_approximate(F2, A2, tau2, q2)
    verify_decomposition(F1, d1)
    verify_decomposition(F2, d2)
    s1 = [s for s, _ in d1.covers]
    s2 = [s for s, _ in d2.covers]
    return DualRun(d1, d2, cross_intersecting(s1, s2),
                   cross_intersecting(as_members(F1), as_members(F2)))


def asymptotic_preset(n: int, k: int, t: int) -> dict:
    """Asymptotic parameter choice (tau1, q1, tau2, q2) with log base 1.01.

    Included for reference; at desk scale q1 dwarfs n^2.
    """
    log = math.log(n, 1.01)
    return {
        "tau1": Fraction(101, 100),
        "q1": int(10 * log),
        "tau2": Fraction(k) / Fraction(log ** 2),
        "q2": math.ceil(Fraction(11, 10) * (t - k)),
    }


# -- Monte-Carlo harness -----------------------------------------------------

@dataclass
class TrialReport:
    empirical: float
    bound: float
    raw_bound: float
    standard_error: float
    trials: int
    seed: int
    inclusion_probability: float
    r: Fraction
    k: int
    closed_form: float | None = None
    within_bound: bool | None = None
    within_closed_form: bool | None = None
    mode: str = "independent"

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["r"] = fmt_fraction(self.r)
        return d


def spread_lemma_bound(r, delta: float, m: float, k: int) -> tuple[float, float]:
    """(clamped, raw) value of 1 - (2 / log2(r delta))^m k."""
    rd = float(r) * delta
    if rd <= 1:
        return 0.0, -math.inf
    lg = math.log2(rd)
    raw = 1 - (2 / lg) ** m * k
    return min(1.0, max(0.0, raw)), raw


def spread_lemma_trial(F, ground: Sequence, r, m: float, delta: float, trials: int, seed: int,
                       mode: str = "independent", clamp: bool = False,
                       closed_form: float | None = None) -> TrialReport:
    """Estimate Pr[some member lies inside W] for a random subset W of ``ground``.

    ``mode="independent"`` keeps each element with probability m*delta;
    ``mode="union"`` takes W as the union of m independent delta-random
    subsets (probability 1 - (1 - delta)^m per element; m rounded to an
    integer count of rounds only for the description, the probability is exact).
    """
    members = as_members(F)
    if not members:
        raise EmptyFamily("trial on an empty family")
    r = _as_fraction(r)
    check = is_r_spread(members, r)
    if not check.ok:
        raise NotSpread(f"family is not {r}-spread (witness {check.witness})")
    if mode == "independent":
        p = m * delta
    elif mode == "union":
        p = 1 - (1 - delta) ** m
    else:
        raise OutOfRange(f"unknown mode {mode!r}")
    if p > 1:
        if not clamp:
            raise OutOfRange(f"inclusion probability {p} exceeds 1")
        p = 1.0
    ground = list(ground)
    index = {g: i for i, g in enumerate(ground)}
    # float32 products are exact here (counts stay far below 2^24) and use BLAS
    inc = np.zeros((len(members), len(ground)), dtype=np.float32)
    for row, mset in enumerate(members):
        for x in mset:
            inc[row, index[x]] = 1
    sizes = inc.sum(axis=1)
    rng = np.random.Generator(np.random.PCG64(seed))
    hits = 0
    block = max(1, min(trials, 2_000_000 // max(1, len(ground))))
    done = 0
    while done < trials:
        b = min(block, trials - done)
        w = (rng.random((b, len(ground))) < p).astype(np.float32)
        covered = ((w @ inc.T) == sizes[None, :]).any(axis=1)
        hits += int(covered.sum())
        done += b
    emp = hits / trials
    k = max(len(mm) for mm in members)
    bound, raw = spread_lemma_bound(r, delta, m, k)
    se = math.sqrt(emp * (1 - emp) / trials)
    rep = TrialReport(emp, bound, raw, se, trials, seed, p, r, k, closed_form=closed_form, mode=mode)
    if bound > 0:
        rep.within_bound = emp >= bound - 3 * se
    if closed_form is not None:
        se_cf = math.sqrt(closed_form * (1 - closed_form) / trials)
        rep.within_closed_form = abs(emp - closed_form) <= 3 * max(se_cf, 1 / trials)
    return rep


def singleton_preset(g: int, m: float, delta: float, trials: int, seed: int, mode: str = "independent",
                     clamp: bool = False) -> TrialReport:
    """All singletons of a g-element ground set: exactly g-spread, k = 1."""
    ground = [Point(1, c) for c in range(1, g + 1)]
    members = [frozenset([x]) for x in ground]
    p = m * delta if mode == "independent" else 1 - (1 - delta) ** m
    p = min(p, 1.0) if clamp else p
    closed = 1 - (1 - p) ** g
    return spread_lemma_trial(members, ground, g, m, delta, trials, seed, mode=mode, clamp=clamp,
                              closed_form=closed)


def best_rational_spread(F, digits: int = 6) -> Fraction:
    """A rational r just below the spreadness of F, confirmed exactly."""
    s = spreadness(F)
    r = Fraction(math.floor(s * 10 ** digits), 10 ** digits)
    while not is_r_spread(F, r).ok:
        r -= Fraction(1, 10 ** digits)
    return r
