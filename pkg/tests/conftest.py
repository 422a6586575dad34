import itertools

import pytest
from hypothesis import strategies as st

from permdiv.perm import Permutation


@st.composite
def permutations(draw, n_min=1, n_max=7):
    n = draw(st.integers(n_min, n_max))
    return Permutation(tuple(draw(st.permutations(range(1, n + 1)))))


@st.composite
def perm_pairs(draw, n_min=1, n_max=7):
    n = draw(st.integers(n_min, n_max))
    a = tuple(draw(st.permutations(range(1, n + 1))))
    b = tuple(draw(st.permutations(range(1, n + 1))))
    return Permutation(a), Permutation(b)


def all_perms(n):
    return [Permutation(p) for p in itertools.permutations(range(1, n + 1))]


@pytest.fixture(scope="session")
def s4():
    return all_perms(4)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
