"""Exact counts for the extremal families, derangements and permanents.

Everything returns Python ints. Bounds involving e use rational
enclosures E_LOWER < e < E_UPPER, chosen per inequality so that a passing
check cannot be a rounding artefact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import mpmath

from .errors import ConstraintConflict, InternalMismatch, OutOfRange, TooLarge
from .perm import PartialPermutation, Point, point_set

PERMANENT_CAP = 24


def _e_enclosure(terms: int = 40) -> tuple[Fraction, Fraction]:
    # partial sum of 1/j! is below e; the tail after 1/K! is below 1/(K! K)
    s = sum(Fraction(1, factorial(j)) for j in range(terms + 1))
    return s, s + Fraction(1, factorial(terms) * terms)


E_LOWER, E_UPPER = _e_enclosure()


@lru_cache(maxsize=None)
def derangement_number(n: int) -> int:
    """d_n via d_n = (n-1)(d_{n-1} + d_{n-2})."""
    if n < 0:
        raise OutOfRange("n must be non-negative")
    a, b = 1, 0  # d_0, d_1
    if n == 0:
        return a
    for m in range(2, n + 1):
        a, b = b, (m - 1) * (a + b)
    return b


def derangement_inclusion_exclusion(n: int) -> int:
    """d_n = sum_i (-1)^i n!/i!, evaluated independently of the recurrence."""
    return sum((-1) ** i * (factorial(n) // factorial(i)) for i in range(n + 1))


def is_nearest_to_n_fact_over_e(n: int) -> bool:
    """True iff |d_n - n!/e| < 1/2 for every e in the rational enclosure."""
    d = derangement_number(n)
    lo = Fraction(factorial(n)) / E_UPPER
    hi = Fraction(factorial(n)) / E_LOWER
    half = Fraction(1, 2)
    return d - half < lo and hi < d + half


def _check_k(n: int, k: int) -> None:
    if not 2 <= k <= n - 2:
        raise OutOfRange(f"need 2 <= k <= n-2, got n={n} k={k}")


def size_N_H_binomial(n: int, k: int) -> int:
    """(n-1)! - sum_{i<k} C(k-1, i) d_{n-i-1}."""
    _check_k(n, k)
    return factorial(n - 1) - sum(comb(k - 1, i) * derangement_number(n - i - 1) for i in range(k))


def size_N_H_inclusion_exclusion(n: int, k: int) -> int:
    """sum_{i=1}^{n-k} (-1)^{i+1} C(n-k, i) (n-1-i)!."""
    _check_k(n, k)
    return sum((-1) ** (i + 1) * comb(n - k, i) * factorial(n - 1 - i) for i in range(1, n - k + 1))


def size_N_H(n: int, k: int) -> int:
    a = size_N_H_binomial(n, k)
    b = size_N_H_inclusion_exclusion(n, k)
    if a != b:
        raise InternalMismatch(f"|N(H_k)| evaluators disagree at n={n} k={k}: {a} != {b}")
    return a


def size_H(k: int) -> int:
    return factorial(k) - factorial(k - 1)


def size_E(n: int, k: int) -> int:
    return size_N_H(n, k) + size_H(k)


def endpoint_value(n: int) -> int:
    """3(n-2)! - 2(n-3)!, the common size of E_{n-3} and E_{n-2}."""
    return 3 * factorial(n - 2) - 2 * factorial(n - 3)


# -- permanents --------------------------------------------------------------

def permanent01(matrix) -> int:
    """Permanent of a square 0-1 matrix by Ryser's formula, Gray-code order."""
    rows = [list(map(int, r)) for r in matrix]
    m = len(rows)
    if any(len(r) != m for r in rows):
        raise OutOfRange("matrix must be square")
    if any(v not in (0, 1) for r in rows for v in r):
        raise OutOfRange("matrix entries must be 0 or 1")
    if m > PERMANENT_CAP:
        raise TooLarge(f"dimension {m} above cap {PERMANENT_CAP}")
    if m == 0:
        return 1
    cols = [[rows[i][j] for i in range(m)] for j in range(m)]
    sums = [0] * m
    total = 0
    gray = 0
    for step in range(1, 1 << m):
        # column toggled between consecutive Gray codes
        j = (step & -step).bit_length() - 1
        gray ^= 1 << j
        sign = 1 if gray >> j & 1 else -1
        col = cols[j]
        for i in range(m):
            sums[i] += sign * col[i]
        prod = 1
        for s in sums:
            if not s:
                prod = 0
                break
            prod *= s
        if prod:
            total += prod if (m - bin(gray).count("1")) % 2 == 0 else -prod
    return total


def menage_matrix(n: int) -> list[list[int]]:
    """J - I - C: zeros on the diagonal and on the cyclic superdiagonal."""
    return [[0 if c == r or c == (r + 1) % n else 1 for c in range(n)] for r in range(n)]


def menage_number(n: int) -> int:
    """U_n by Touchard's sum over k of (-1)^k 2n/(2n-k) C(2n-k, k) (n-k)!."""
    if n < 3:
        raise OutOfRange("menage numbers need n >= 3")
    total = Fraction(0)
    for k in range(n + 1):
        total += (-1) ** k * Fraction(2 * n, 2 * n - k) * comb(2 * n - k, k) * factorial(n - k)
    if total.denominator != 1:
        raise InternalMismatch(f"non-integral Touchard sum at n={n}")
    return int(total)


def menage_lower_envelope_holds(n: int) -> bool:
    """U_n >= (n!/e^2)(n-2)/(n-1), with 1/e^2 rounded upward."""
    bound = Fraction(factorial(n) * (n - 2), n - 1) / (E_LOWER ** 2)
    return menage_number(n) >= bound


# -- double avoidance --------------------------------------------------------

def double_avoid_count(n: int, sigma, pi, p1, p2) -> int:
    """Permutations containing p1 and p2 and meeting neither sigma nor pi.

    Deleting the rows and columns of p1, p2 leaves an (n-2)x(n-2) 0-1 matrix
    with zeros where sigma or pi put points; its permanent is the count.
    """
    p1, p2 = Point(*p1), Point(*p2)
    forbidden = point_set(sigma) | point_set(pi)
    if p1 == p2 or p1.row == p2.row or p1.col == p2.col:
        raise ConstraintConflict("p1 and p2 must form a partial permutation of size 2")
    if p1 in forbidden or p2 in forbidden:
        raise ConstraintConflict("p1/p2 lie on sigma or pi")
    for p in (p1, p2, *forbidden):
        if not (1 <= p.row <= n and 1 <= p.col <= n):
            raise OutOfRange(f"point {tuple(p)} outside [{n}]^2")
    rows = [r for r in range(1, n + 1) if r not in (p1.row, p2.row)]
    cols = [c for c in range(1, n + 1) if c not in (p1.col, p2.col)]
    matrix = [[0 if Point(r, c) in forbidden else 1 for c in cols] for r in rows]
    return permanent01(matrix)


def double_avoid_bound(n: int) -> Fraction:
    """Upper rational enclosure of (n-2)!/e^2 - 2(n-3)!/e^2."""
    return Fraction(factorial(n - 2) - 2 * factorial(n - 3)) / (E_LOWER ** 2)


# -- hitting-set weighting ----------------------------------------------------

def hitting_weighted_count(n: int, t: int, i: int) -> int:
    """sum_{j=i}^{t-i-1} C(t-i-1, j-i) d_{n-j-1}, taken literally.

    An inverted range gives 0.
    """
    if not 2 <= i <= t - 1 <= n - 1:
        raise OutOfRange(f"need 2 <= i <= t-1 <= n-1, got n={n} t={t} i={i}")
    return sum(comb(t - i - 1, j - i) * derangement_number(n - j - 1) for j in range(i, t - i))


def containing_count(n: int, t: int, i: int) -> int:
    """Permutations fixing 1, disjoint from alpha_{t+1,n}, containing i fixed
    diagonal points of [2,t]^2: sum_{j=i}^{t-1} C(t-1-i, j-i) d_{n-j-1}.
    """
    if not 1 <= i <= t - 1 <= n - 1:
        raise OutOfRange(f"need 1 <= i <= t-1 <= n-1, got n={n} t={t} i={i}")
    return sum(comb(t - 1 - i, j - i) * derangement_number(n - j - 1) for j in range(i, t))


# -- asymptotics -------------------------------------------------------------

@dataclass(frozen=True)
class EstimateReport:
    n: int
    k: int
    which: int
    exact: int
    estimate: mpmath.mpf
    relative_error: mpmath.mpf
    claimed_error_order: str


def asymptotic_estimate(n: int, k: int, which: int, dps: int = 60) -> EstimateReport:
    """Leading-term estimate of |N(H_k)| against its exact value.

    ``which=1``: (n-2)! (n-k), error order (n-k)^2/n relative to (n-2)!.
    ``which=2``: (n-1)! (1 - e^{-1} (1 + 1/n)^{k-1}), error order k log^2 n / n^2.
    """
    _check_k(n, k)
    exact = size_N_H(n, k)
    with mpmath.workdps(dps):
        if which == 1:
            est = mpmath.mpf(factorial(n - 2)) * (n - k)
            order = "O((n-k)^2/n) * (n-2)!"
        elif which == 2:
            est = mpmath.mpf(factorial(n - 1)) * (1 - mpmath.exp(-1) * (1 + mpmath.mpf(1) / n) ** (k - 1))
            order = "O(k log^2 n / n^2) * (n-1)!"
        else:
            raise OutOfRange("which must be 1 or 2")
        rel = abs(est - exact) / exact
    return EstimateReport(n, k, which, exact, est, rel, order)


def linear_regime_ratio(n: int, c: Fraction = Fraction(1, 2)) -> mpmath.mpf:
    """|N(H_k)| / (n-1)! at k = floor(c n); tends to 1 - e^{c-1}."""
    k = int(c * n)
    with mpmath.workdps(40):
        return mpmath.mpf(size_N_H(n, k)) / factorial(n - 1)
