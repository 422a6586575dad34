import json
import math
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permdiv.errors import EmptyFamily, NotSpread, NotSubfamily, OutOfRange, TooLarge
from permdiv.family import PermFamily, build_E, build_H, star
from permdiv.perm import Point
from permdiv.spread import (
    AmbientSpace, best_rational_spread, cross_intersecting, dual_approximation, find_maximal_qualifying_set,
    fmt_fraction, is_homogeneous, is_r_spread, is_rq_spread, parse_fraction, singleton_preset,
    spread_approximate, spread_lemma_bound, spread_lemma_trial, spreadness, verify_decomposition,
)


def _grid_points(n):
    return [Point(r, c) for r in range(1, n + 1) for c in range(1, n + 1)]


def _partials(n, max_size):
    pts = _grid_points(n)
    for s in range(1, max_size + 1):
        for combo in combinations(pts, s):
            if len({p.row for p in combo}) == s == len({p.col for p in combo}):
                yield frozenset(combo)


def _oracle_homogeneous(F, n, tau):
    members = [p.pointset for p in F]
    for s in _partials(n, n):
        c = sum(1 for m in members if s <= m)
        if c * math.factorial(n) > tau ** len(s) * math.factorial(n - len(s)) * len(members):
            return False
    return True


def _oracle_r_spread(F, n, r):
    members = [p.pointset for p in F]
    return all(sum(1 for m in members if s <= m) * r ** len(s) <= len(members) for s in _partials(n, n))


def random_family(n, seed, size):
    rng = np.random.default_rng(seed)
    return PermFamily.from_ranks(n, rng.choice(math.factorial(n), size=size, replace=False))


def test_fraction_text():
    assert parse_fraction("3/2") == Fraction(3, 2)
    assert fmt_fraction(Fraction(4)) == "4/1"
    with pytest.raises(OutOfRange):
        parse_fraction("x/2")


def test_ambient_sizes():
    A = AmbientSpace.sigma(5, [(1, 1)])
    assert A.size == 24
    assert A.quotient_size([(2, 3)]) == 6
    assert A.quotient_size([(1, 2)]) == 0
    assert A.describe() == "Sigma[1..5][1->1]"


def test_star_is_not_spread_and_sigma_is():
    assert not is_r_spread(star(4), 2).ok
    # binding constraint is |X| = 4: 1/24 <= r^-4
    assert is_r_spread(PermFamily.full(4), Fraction(22, 10)).ok
    assert not is_r_spread(PermFamily.full(4), Fraction(23, 10)).ok
    assert spreadness(PermFamily.full(4)) == pytest.approx(24 ** 0.25)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 4), st.integers(0, 10 ** 6), st.integers(1, 12), st.fractions(1, 4))
def test_r_spread_matches_oracle(n, seed, size, r):
    F = random_family(n, seed, min(size, math.factorial(n)))
    assert is_r_spread(F, r).ok == _oracle_r_spread(F, n, r)
    assert spreadness(F) >= float(best_rational_spread(F))


@pytest.mark.parametrize("m", [4, 5, 6])
def test_sigma_rq_spread(m):
    res = is_rq_spread(PermFamily.full(m), Fraction(m, 4), Fraction(m, 4))
    assert res.ok and res.exact


def test_rq_spread_failure_has_witness():
    res = is_rq_spread(PermFamily.full(4), 4, 4)
    assert not res.ok and res.witness_x


def test_rq_spread_budget():
    with pytest.raises(TooLarge):
        is_rq_spread([frozenset(_grid_points(3)[:3])] * 2, 1, 1, budget=1)
    res = is_rq_spread(PermFamily.full(5), Fraction(5, 4), 1, budget=10, samples=200)
    assert res.ok and not res.exact


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 4), st.integers(0, 10 ** 6), st.integers(1, 10), st.sampled_from([Fraction(3, 2), 2, 3]))
def test_homogeneity_matches_oracle(n, seed, size, tau):
    F = random_family(n, seed, min(size, math.factorial(n)))
    assert is_homogeneous(F, AmbientSpace.sigma(n), tau).ok == _oracle_homogeneous(F, n, tau)


def test_homogeneity_needs_subfamily():
    with pytest.raises(NotSubfamily):
        is_homogeneous(star(4, 2, 2), AmbientSpace.sigma(4, [(1, 1)]), 2)
    with pytest.raises(EmptyFamily):
        is_homogeneous([], AmbientSpace.sigma(4), 2)


def test_maximal_qualifying_examples():
    assert find_maximal_qualifying_set(star(5), AmbientSpace.sigma(5), 2) == (Point(1, 1), Point(2, 2))
    s = find_maximal_qualifying_set(PermFamily.full(5), AmbientSpace.sigma(5), Fraction(3, 2))
    assert s == ()


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 4), st.integers(0, 10 ** 6), st.integers(1, 10), st.sampled_from([Fraction(5, 4), 2]))
def test_maximal_qualifying_is_maximal(n, seed, size, tau):
    F = random_family(n, seed, min(size, math.factorial(n)))
    A = AmbientSpace.sigma(n)
    s = frozenset(find_maximal_qualifying_set(F, A, tau))
    members = [p.pointset for p in F]

    def qualifies(x):
        c = sum(1 for m in members if x <= m)
        return c > 0 and c * A.size >= tau ** len(x) * A.quotient_size(x) * len(members)

    assert qualifies(s)
    for x in _partials(n, n):
        if s < x:
            assert not qualifies(x)


BATTERY = [
    (build_E(5, 2), Fraction(3, 2), 3),
    (star(5), Fraction(2), 2),
    (build_H(5, 3) | star(5), Fraction(5, 4), 2),
    (PermFamily.full(4), Fraction(3, 2), 1),
]


@pytest.mark.parametrize("F,tau,q", BATTERY)
def test_decomposition_postconditions(F, tau, q):
    dec = spread_approximate(F, AmbientSpace.sigma(F.n), tau, q)
    assert all(verify_decomposition(F, dec).values())
    for s, part in dec.covers:
        quotient = [p.pointset - frozenset(s) for p in part]
        assert is_homogeneous(quotient, AmbientSpace.sigma(F.n), 1) is not None
    doc = json.loads(dec.to_json())
    assert doc["residual_size"] == len(dec.residual)
    assert doc["input_size"] == len(F)


def test_star_decomposes_through_its_centre():
    dec = spread_approximate(star(5), AmbientSpace.sigma(5), 2, 2)
    assert dec.covers and Point(1, 1) in dec.covers[0][0]
    assert len(dec.residual) * 2 ** 3 <= 120


def test_decomposition_rejects_small_tau():
    with pytest.raises(OutOfRange):
        spread_approximate(star(4), AmbientSpace.sigma(4), 1, 2)


def test_decomposition_within_star_ambient():
    A = AmbientSpace.sigma(5, [(1, 1)])
    N = build_E(5, 2) & star(5)
    dec = spread_approximate(N, A, Fraction(3, 2), 2)
    assert all(verify_decomposition(N, dec).values())


def test_dual_approximation_reports_cross_intersection():
    F1 = star(4)
    F2 = star(4, 2, 2)
    run = dual_approximation(F1, AmbientSpace.sigma(4), 2, 2, F2, AmbientSpace.sigma(4), 2, 2)
    assert run.inputs_cross_intersecting is False
    assert isinstance(run.cross_intersecting, bool)
    assert cross_intersecting([], [[(1, 1)]])


def test_spread_lemma_bound_clamps():
    assert spread_lemma_bound(4, 0.2, 2, 1) == (0.0, -math.inf)
    assert spread_lemma_bound(4, 0.5, 2, 1) == (0.0, -3.0)
    clamped, raw = spread_lemma_bound(1024, 1 / 64, 3, 1)
    assert raw == pytest.approx(1 - 0.5 ** 3)
    assert clamped == raw


@pytest.mark.parametrize("g,m,delta", [(20, 1, 0.05), (64, 7, 0.0714), (30, 2, 0.01)])
def test_singleton_preset_matches_closed_form(g, m, delta):
    rep = singleton_preset(g, m, delta, 20000, seed=7)
    assert rep.within_closed_form


def test_singleton_preset_above_bound():
    rep = singleton_preset(1024, 3, 1 / 64, 20000, seed=1)
    assert rep.bound > 0 and rep.within_bound


def test_trial_reproducible():
    a = singleton_preset(20, 1, 0.05, 5000, seed=3)
    b = singleton_preset(20, 1, 0.05, 5000, seed=3)
    assert a.empirical == b.empirical


def test_trial_union_mode():
    rep = singleton_preset(20, 2, 0.05, 20000, seed=5, mode="union")
    assert rep.inclusion_probability == pytest.approx(1 - 0.95 ** 2)
    assert rep.within_closed_form


def test_trial_guards():
    with pytest.raises(OutOfRange):
        singleton_preset(10, 20, 0.1, 100, seed=0)
    rep = singleton_preset(10, 20, 0.1, 100, seed=0, clamp=True)
    assert rep.inclusion_probability == 1.0 and rep.empirical == 1.0
    with pytest.raises(NotSpread):
        spread_lemma_trial(star(4), _grid_points(4), 5, 1, 0.1, 10, seed=0)
