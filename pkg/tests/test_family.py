from math import factorial

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import all_perms
from permdiv import counting as C
from permdiv.errors import EmptyInput, MismatchedGround, NotIntersecting, OutOfRange
from permdiv.family import (
    PermFamily, are_isomorphic, brute_filter, build_E, build_H, degree_matrix, derangements, diversity,
    dumps_ranks, dumps_text, first_disjoint_pair, hilton_milner, is_intersecting, loads_ranks, loads_text,
    maximal_closure, neighborhood_N, parse_family, sigma_filter, star, stats, translate,
)
from permdiv.perm import Permutation, Point, alpha, cycle_shift, identity, make_partial, perm_table


def _naive_is_intersecting(F):
    members = list(F)
    return all(a.pointset & b.pointset for i, a in enumerate(members) for b in members[i + 1:])


def ranks_strategy(n):
    return st.sets(st.integers(0, factorial(n) - 1), max_size=40)


def test_set_algebra():
    a = PermFamily.from_ranks(4, [0, 1, 2])
    b = PermFamily.from_ranks(4, [2, 3])
    assert list((a | b).ranks()) == [0, 1, 2, 3]
    assert list((a & b).ranks()) == [2]
    assert list((a - b).ranks()) == [0, 1]
    assert not a.isdisjoint(b)
    assert (a & b).issubset(a)
    with pytest.raises(MismatchedGround):
        a | PermFamily.full(3)


def test_members_read_only():
    F = star(4)
    with pytest.raises(ValueError):
        F.members[0] = False


def test_contains_and_iteration_order():
    F = PermFamily.from_perms(3, [Permutation((3, 2, 1)), identity(3)])
    assert [p.map for p in F] == [(1, 2, 3), (3, 2, 1)]
    assert identity(3) in F
    assert Permutation((2, 1, 3)) not in F


@pytest.mark.parametrize("n", [3, 4, 5])
def test_sigma_filter_matches_brute(n):
    cases = [
        dict(contains=[(1, 2)]),
        dict(avoids=[(1, 1), (2, 1), (3, 3)]),
        dict(intersect_each=[identity(n), cycle_shift(n)]),
        dict(avoid_each=[identity(n)], contains=[(2, 3)]),
        dict(contains=[(1, 1)], intersect_each=[alpha(2, n, n)]),
    ]
    for kw in cases:
        assert sigma_filter(n, **kw) == brute_filter(n, **kw), kw


def test_sigma_filter_infeasible_is_empty():
    assert len(sigma_filter(4, contains=[(1, 1)], avoids=[(1, 1)])) == 0


@pytest.mark.parametrize("n", range(1, 8))
def test_derangement_counts(n):
    assert len(derangements(n)) == C.derangement_number(n)


@pytest.mark.parametrize("n,k", [(n, k) for n in range(4, 8) for k in range(2, n - 1)])
def test_E_construction(n, k):
    H, N = build_H(n, k), neighborhood_N(n, build_H(n, k))
    assert len(H) == factorial(k) - factorial(k - 1)
    assert H.isdisjoint(N)
    E = build_E(n, k)
    assert E == H | N
    assert len(E) == C.size_E(n, k)
    assert is_intersecting(E)
    assert stats(E).diversity == len(H)


def test_known_E_sizes():
    assert [len(build_E(4, 2)), len(build_E(5, 2)), len(build_E(6, 3))] == [4, 14, 60]
    assert len(neighborhood_N(6, build_H(6, 3))) == 56


@pytest.mark.parametrize("n,k", [(5, 2), (6, 3), (6, 4)])
def test_neighbourhood_matches_brute(n, k):
    H = build_H(n, k)
    assert neighborhood_N(n, H) == brute_filter(n, contains=[(1, 1)], intersect_each=list(H))


def test_neighbourhood_empty_input():
    with pytest.raises(EmptyInput):
        neighborhood_N(4, PermFamily.empty(4))


def test_build_H_range():
    with pytest.raises(OutOfRange):
        build_H(5, 4)
    with pytest.raises(OutOfRange):
        build_H(5, 1)


def test_E2_isomorphic_to_hilton_milner():
    for n in (4, 5):
        hm = hilton_milner(n, Permutation((2, 1) + tuple(range(3, n + 1))))
        assert len(hm) == len(build_E(n, 2))
        assert are_isomorphic(build_E(n, 2), hm) is not None


def test_stats_of_star_and_empty():
    st_ = stats(star(5, 2, 3))
    assert (st_.size, st_.max_degree, st_.diversity) == (24, 24, 0)
    assert st_.common_intersection.pointset == {Point(2, 3)}
    empty = stats(PermFamily.empty(4))
    assert (empty.size, empty.max_degree, empty.max_degree_point, empty.diversity,
            empty.common_intersection) == (0, 0, None, 0, None)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 5).flatmap(lambda n: st.tuples(st.just(n), ranks_strategy(n))))
def test_stats_against_naive(args):
    n, ranks = args
    F = PermFamily.from_ranks(n, ranks)
    deg = {}
    for p in F:
        for x in p:
            deg[x] = deg.get(x, 0) + 1
    best = max(deg.values(), default=0)
    assert stats(F).max_degree == best
    assert diversity(F) == len(F) - best
    assert int(degree_matrix(F).sum()) == n * len(F)
    assert is_intersecting(F) == _naive_is_intersecting(F)
    pair = first_disjoint_pair(F)
    assert (pair is None) == is_intersecting(F)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 5).flatmap(lambda n: st.tuples(st.just(n), ranks_strategy(n), st.data())))
def test_diversity_invariant_under_translation(args):
    n, ranks, data = args
    F = PermFamily.from_ranks(n, ranks)
    pi = Permutation(tuple(data.draw(st.permutations(range(1, n + 1)))))
    rho = Permutation(tuple(data.draw(st.permutations(range(1, n + 1)))))
    G = translate(F, pi, rho)
    assert len(G) == len(F)
    assert diversity(G) == diversity(F)
    assert is_intersecting(G) == is_intersecting(F)
    if len(F) <= 6:
        found = are_isomorphic(F, G)
        assert found is not None
        assert translate(F, *found) == G


@pytest.mark.parametrize("n,k", [(n, k) for n in range(4, 8) for k in range(2, n - 1)])
def test_closure_of_H_is_E(n, k):
    assert maximal_closure(build_H(n, k)) == build_E(n, k)


@pytest.mark.parametrize("n", [4, 5])
def test_closure_is_maximal(n):
    F = PermFamily.from_perms(n, [identity(n)])
    G = maximal_closure(F)
    assert is_intersecting(G) and F.issubset(G)
    table = perm_table(n)
    outside = np.flatnonzero(~G.members)
    assert all(not (table[G.ranks()] == table[r]).any(axis=1).all() for r in outside)


def test_closure_errors():
    with pytest.raises(EmptyInput):
        maximal_closure(PermFamily.empty(4))
    with pytest.raises(NotIntersecting):
        maximal_closure(PermFamily.from_perms(3, [identity(3), cycle_shift(3)]))


def test_intersecting_agrees_with_graph_clique():
    n = 4
    perms = all_perms(n)
    g = nx.Graph()
    g.add_nodes_from(range(len(perms)))
    g.add_edges_from((i, j) for i in range(len(perms)) for j in range(i + 1, len(perms))
                     if perms[i].pointset & perms[j].pointset)
    for clique in list(nx.find_cliques(g))[:50]:
        assert is_intersecting(PermFamily.from_perms(n, [perms[i] for i in clique]))


def test_text_and_rank_roundtrip(tmp_path):
    F = build_E(5, 3)
    assert loads_text(dumps_text(F)) == F
    assert loads_ranks(dumps_ranks(F), 5) == F
    assert dumps_text(F).splitlines()[0] == "n=5 size=14"
    path = tmp_path / "f.txt"
    path.write_text(dumps_text(F), encoding="utf-8")
    assert parse_family(f"file:{path}") == F
    bpath = tmp_path / "f.bin"
    bpath.write_bytes(dumps_ranks(F))
    assert parse_family(f"ranks:5:{bpath}") == F


def test_text_size_mismatch():
    with pytest.raises(OutOfRange):
        loads_text("n=3 size=2\n1 2 3\n")


@pytest.mark.parametrize("literal,size", [("E:5:2", 14), ("H:6:3", 4), ("star:4:2:2", 6), ("sigma:4", 24)])
def test_parse_family_literals(literal, size):
    assert len(parse_family(literal)) == size


@pytest.mark.parametrize("bad", ["E:5", "Q:1", "star:4:x:1"])
def test_parse_family_rejects(bad):
    with pytest.raises(OutOfRange):
        parse_family(bad)


def test_restrict_and_quotient():
    F = PermFamily.full(4)
    X = make_partial(4, [(1, 2)])
    assert F.restrict(X) == star(4, 1, 2)
    assert all(Point(1, 2) not in q and len(q) == 3 for q in F.quotient(X))
