"""Invariant suites run by ``permdiv verify``.

Each suite yields ``Check`` records; a failing check carries a small
counterexample description.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Callable, Iterator

import numpy as np

from . import counting as C
from . import family as fam
from . import hitting as hit
from . import spread as spr
from .perm import alpha, count_partials, perm_table, rank_rows, unrank


@dataclass
class Check:
    suite: str
    name: str
    ok: bool
    detail: str = ""


def perm_suite(cap: int, **_) -> Iterator[Check]:
    for n in range(1, min(cap, 7) + 1):
        table = perm_table(n)
        ok = np.array_equal(rank_rows(table), np.arange(factorial(n)))
        ok &= all(unrank(n, r).map == tuple(int(v) for v in table[r]) for r in range(0, factorial(n), max(1, factorial(n) // 97)))
        yield Check("perm", f"rank_unrank_bijection n={n}", bool(ok))
    for n in range(1, min(cap, 4) + 1):
        bad = [s for s in range(n + 1) if count_partials(n, s) != comb(n, s) ** 2 * factorial(s)]
        yield Check("perm", f"partial_counts n={n}", not bad, f"sizes {bad}" if bad else "")


def family_suite(cap: int, fault: bool = False, **_) -> Iterator[Check]:
    for n in range(4, min(cap, 7) + 1):
        for k in range(2, n - 1):
            H = fam.build_H(n, k)
            N = fam.neighborhood_N(n, H)
            E = H | N
            if fault and n == 4 and k == 2:
                E = E.with_bit_flipped(int(np.flatnonzero(~E.members)[0]))
            checks = {
                "size_H": (len(H), factorial(k) - factorial(k - 1)),
                "size_N_H": (len(N), C.size_N_H(n, k)),
                "size_E": (len(E), C.size_E(n, k)),
                "diversity_E": (fam.stats(E).diversity, factorial(k) - factorial(k - 1)),
            }
            for name, (got, want) in checks.items():
                yield Check("family", f"{name} n={n} k={k}", got == want, f"got {got}, expected {want}")
            yield Check("family", f"H_disjoint_N n={n} k={k}", H.isdisjoint(N))
            inter = fam.is_intersecting(E)
            pair = "" if inter else " / ".join(str(p) for p in fam.first_disjoint_pair(E))
            yield Check("family", f"E_intersecting n={n} k={k}", inter, pair)
            alt = fam.sigma_filter(n, contains=[(1, 1)], intersect_each=[alpha(k + 1, n, n)])
            yield Check("family", f"N_support_characterisation n={n} k={k}", alt == N)
    for n in range(5, min(cap, 7) + 1):
        same = len(fam.build_E(n, n - 3)) == len(fam.build_E(n, n - 2)) == C.endpoint_value(n)
        yield Check("family", f"endpoint_sizes n={n}", same)


def counting_suite(cap: int, **_) -> Iterator[Check]:
    for n in range(4, 31):
        for k in range(2, n - 1):
            a, b = C.size_N_H_binomial(n, k), C.size_N_H_inclusion_exclusion(n, k)
            if a != b:
                yield Check("counting", f"eq2_vs_eq6 n={n} k={k}", False, f"{a} != {b}")
                return
    yield Check("counting", "eq2_vs_eq6 n<=30", True)
    bad = [n for n in range(5, 31) if not C.size_E(n, n - 3) == C.size_E(n, n - 2) == C.endpoint_value(n)]
    yield Check("counting", "endpoint_identity 5<=n<=30", not bad, f"n={bad}")
    # |E_k| decreases in k; the drop is at least d_{n-2} from n=7 on (n=6, k=3 drops by 8 < 9)
    gap = [(n, k) for n in range(7, 31) for k in range(3, n - 2)
           if C.size_E(n, k - 1) - C.size_E(n, k) < C.derangement_number(n - 2)]
    yield Check("counting", "gap_drop 7<=n<=30", not gap, f"{gap[:3]}")
    der = [n for n in range(0, 31) if C.derangement_number(n) != C.derangement_inclusion_exclusion(n)]
    yield Check("counting", "derangement_recurrence_vs_sum", not der, f"n={der}")
    near = [n for n in range(1, 31) if not C.is_nearest_to_n_fact_over_e(n)]
    yield Check("counting", "derangement_nearest_n!/e 1<=n<=30", not near, f"n={near}")
    men = [n for n in range(3, min(cap, 6) + 5) if C.menage_number(n) != C.permanent01(C.menage_matrix(n))]
    yield Check("counting", "menage_touchard_vs_permanent", not men, f"n={men}")


def hitting_suite(cap: int, t: int = 5, seed: int = 0, **_) -> Iterator[Check]:
    rng = np.random.default_rng(seed)
    for tt in range(3, t + 1):
        for trial in range(20):
            inst = hit.random_instance(rng, tt, int(rng.integers(1, 6)), max(1, tt - 1))
            rep = hit.minimal_hitting_sets(inst, max_size=tt - 1)
            oracle = hit.brute_minimal_hitting_sets(inst, hit.grid(2, tt), tt - 1)
            got = {frozenset(s) for s in rep.all_sets()}
            if got != oracle:
                yield Check("hitting", f"oracle t={tt}", False, f"instance {inst}")
                break
        else:
            yield Check("hitting", f"oracle t={tt}", True)
        bad = None
        for trial in range(20):
            if tt < 4:
                break
            inst = hit.random_instance(rng, tt, int(rng.integers(2, 7)), tt - 2)
            res = hit.hitting_bound_check(inst, tt)
            if not res.holds:
                bad = inst
                break
        yield Check("hitting", f"bound t={tt}", bad is None, f"instance {bad}" if bad else "")


def spread_suite(cap: int, **_) -> Iterator[Check]:
    for m in range(4, min(cap, 6) + 1):
        res = spr.is_rq_spread(fam.PermFamily.full(m), Fraction(m, 4), Fraction(m, 4))
        yield Check("spread", f"sigma_{m}_(m/4,m/4)_spread", res.ok, f"S={res.witness_s} X={res.witness_x}")
    for F, tau, q in [(fam.build_E(5, 2), Fraction(3, 2), 3), (fam.star(5), Fraction(2), 2),
                      (fam.build_H(5, 3) | fam.star(5), Fraction(5, 4), 2)]:
        dec = spr.spread_approximate(F, spr.AmbientSpace.sigma(F.n), tau, q)
        verdicts = spr.verify_decomposition(F, dec)
        yield Check("spread", f"decomposition |F|={len(F)} tau={tau} q={q}", all(verdicts.values()), str(verdicts))


def extremal_suite(cap: int, **_) -> Iterator[Check]:
    from . import extremal as ex

    rep = ex.frontier(4)
    sizes = [r.max_family_size for r in rep.frontier]
    yield Check("extremal", "frontier_n4_nonincreasing", sizes == sorted(sizes, reverse=True), str(sizes))
    yield Check("extremal", "ekr_max_n4", rep.ekr_max == 6, str(rep.ekr_max))


SUITES: dict[str, Callable[..., Iterator[Check]]] = {
    "perm": perm_suite,
    "family": family_suite,
    "counting": counting_suite,
    "hitting": hitting_suite,
    "spread": spread_suite,
    "extremal": extremal_suite,
}
