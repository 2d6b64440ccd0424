"""Binary searches over distance orders and grid membership recovery."""

from typing import Sequence

import numpy as np

from fuzzyquery.core.oracle import MembershipOracle
from fuzzyquery.core.structure import sort_by_distance
from fuzzyquery.errors import ConfigError
from fuzzyquery.schemas.solver import GridEstimate
from fuzzyquery.utils.helpers import PointsLike, grid_levels


def binary_search_threshold(oracle: MembershipOracle, pi: Sequence[int], j: int, x: float) -> int:
    """Largest 1-based position p with U[pi[p-1], j] >= x, or 0 when none.

    Assumes memberships to j are non-increasing along pi; otherwise the
    result is some position, not necessarily the largest.
    """
    n = len(pi)
    if x <= 0:
        return n
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if oracle.membership_query(pi[mid - 1], j) >= x:
            lo = mid
        else:
            hi = mid - 1
    return lo


def binary_search2(oracle: MembershipOracle, pi: Sequence[int], t1: int, x: float) -> int:
    """Smallest 1-based position p with 1 - U[pi[p-1], t1] >= x, or n + 1 when none.

    Only cluster t1 is queried; with two clusters 1 - U_t1 is the membership
    to the other one.
    """
    n = len(pi)
    if x <= 0:
        return 1
    lo, hi = 1, n + 1
    while lo < hi:
        mid = (lo + hi) // 2
        if 1.0 - oracle.membership_query(pi[mid - 1], t1) >= x:
            hi = mid
        else:
            lo = mid + 1
    return lo


def estimate_memberships_grid(
    X: PointsLike,
    oracle: MembershipOracle,
    center_hat,
    j: int,
    eta: float,
) -> GridEstimate:
    """Recover memberships to cluster j on the eta-grid.

    Sorts by distance from `center_hat` and binary-searches the last position
    whose membership reaches each level s*eta; positions in
    (threshold[s+1], threshold[s]] get s*eta. When the estimated center is
    within gamma of the true one, 0 <= U - U_hat <= eta holds exactly.
    """
    if not 0 < eta <= 1:
        raise ConfigError(f"grid width must lie in (0, 1], got {eta}")
    pi = sort_by_distance(X, center_hat)
    levels = grid_levels(eta)
    start = oracle.ledger.total

    thresholds = [binary_search_threshold(oracle, pi, j, x) for x in levels]

    sorted_values = np.zeros(len(pi))
    for level, ell in zip(levels, thresholds):
        sorted_values[:ell] = level
    values = np.empty_like(sorted_values)
    values[pi] = sorted_values

    return GridEstimate(
        values=values,
        grid=eta,
        thresholds=thresholds,
        permutation=pi,
        queries=oracle.ledger.total - start,
    )
