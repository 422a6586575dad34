import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from permdiv.errors import EmptyFamily, PreconditionViolation
from permdiv.family import build_E
from permdiv.hitting import (
    brute_minimal_hitting_sets, diversity_fragments, grid, hitting_bound_check, minimal_hitting_sets,
    random_instance,
)
from permdiv.perm import Point


def P(r, c):
    return Point(r, c)


@st.composite
def instances(draw, t_max=5):
    t = draw(st.integers(3, t_max))
    labels = list(range(2, t + 1))
    members = []
    for _ in range(draw(st.integers(1, 5))):
        rows = draw(st.lists(st.sampled_from(labels), min_size=1, max_size=t - 1, unique=True))
        cols = draw(st.permutations(labels))[: len(rows)]
        members.append(tuple(P(r, c) for r, c in zip(rows, cols)))
    return t, members


def test_two_member_example():
    rep = minimal_hitting_sets([[P(2, 3), P(3, 2)], [P(2, 2)]], max_size=2)
    assert rep.counts() == {2: 2}
    assert set(rep.all_sets()) == {(P(2, 2), P(2, 3)), (P(2, 2), P(3, 2))}


def test_common_point_gives_singleton():
    rep = minimal_hitting_sets([[P(2, 2), P(3, 3)], [P(2, 2)]], max_size=2)
    assert rep.by_size[1] == [(P(2, 2),)]
    assert rep.common_points == (P(2, 2),)
    assert 2 not in rep.by_size or all(P(2, 2) not in s for s in rep.by_size[2])


def test_empty_member_cannot_be_hit():
    rep = minimal_hitting_sets([[], [P(2, 2)]], max_size=3)
    assert rep.has_empty_member and rep.all_sets() == []


def test_empty_family():
    with pytest.raises(EmptyFamily):
        minimal_hitting_sets([], max_size=2)


@settings(max_examples=150, deadline=None)
@given(instances())
def test_matches_subset_lattice(inst):
    t, members = inst
    rep = minimal_hitting_sets(members, max_size=t - 1)
    got = {frozenset(s) for s in rep.all_sets()}
    assert got == brute_minimal_hitting_sets(members, grid(2, t), t - 1)
    for s in got:
        assert all(s & set(m) for m in members)


@settings(max_examples=100, deadline=None)
@given(instances())
def test_count_within_width_power(inst):
    t, members = inst
    width = max(len(m) for m in members)
    rep = minimal_hitting_sets(members, max_size=t - 1)
    for i, c in rep.counts().items():
        assert c <= width ** i


@pytest.mark.parametrize("t", [4, 5, 6])
def test_bound_check_random(t):
    rng = np.random.default_rng(t)
    for _ in range(40):
        inst = random_instance(rng, t, int(rng.integers(2, 7)), t - 2)
        res = hitting_bound_check(inst, t)
        assert res.holds
        assert all(res.counts.get(i, 0) <= (t - 2) ** i for i in range(2, t))


def test_bound_check_preconditions():
    with pytest.raises(PreconditionViolation):
        hitting_bound_check([[P(2, 2), P(3, 3), P(4, 4)]], 4)
    with pytest.raises(PreconditionViolation):
        hitting_bound_check([[P(1, 2)]], 4)


def test_bound_check_flags_singletons():
    res = hitting_bound_check([[P(2, 2)], [P(2, 2), P(3, 3)]], 5)
    assert not res.no_singletons


def test_report_json_shape():
    rep = minimal_hitting_sets([[P(2, 3), P(3, 2)], [P(2, 2)]], max_size=2, t=4)
    doc = json.loads(rep.to_json())
    assert set(doc) == {"t", "counts", "bounds", "sets"}
    assert doc["counts"] == {"2": 2}
    assert doc["bounds"]["2"] == 4


def test_search_tree_depth_bounded():
    rep = minimal_hitting_sets([[P(2, 2), P(3, 3)], [P(2, 3), P(3, 2)]], max_size=3)
    assert max(rep.nodes_by_depth) <= 3
    assert rep.witness_chain[0] == 0


def test_fragments_of_E():
    frags, t = diversity_fragments(build_E(6, 3))
    assert t == 3
    assert len(frags) == 4
    for f in frags:
        assert all(2 <= p.row <= t and 2 <= p.col <= t for p in f)


def test_grid():
    assert len(grid(2, 4)) == 9
