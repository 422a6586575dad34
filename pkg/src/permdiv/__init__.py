"""Exact enumeration and counting for intersecting permutation families."""
from .counting import (
    asymptotic_estimate,
    derangement_number,
    double_avoid_count,
    hitting_weighted_count,
    menage_number,
    permanent01,
    size_E,
    size_N_H,
)
from .family import (
    FamilyStats,
    PermFamily,
    are_isomorphic,
    build_E,
    build_H,
    is_intersecting,
    maximal_closure,
    neighborhood_N,
    sigma_filter,
    stats,
)
from .hitting import hitting_bound_check, minimal_hitting_sets
from .perm import (
    PartialPermutation,
    Permutation,
    Point,
    alpha,
    compose,
    extensions,
    intersects,
    inverse,
    make_partial,
    rank,
    support,
    unrank,
)

__version__ = "0.1.0"
