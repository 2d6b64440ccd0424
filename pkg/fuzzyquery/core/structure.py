"""Structural quantities of a clustering: beta, gamma, distance orders, consistency."""

from typing import List, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy.spatial.distance import pdist

from fuzzyquery.core.fuzzy import update_centers
from fuzzyquery.errors import DegenerateClusterError
from fuzzyquery.schemas.clustering import Clustering, MembershipMatrix
from fuzzyquery.utils.helpers import PointsLike, as_centers, as_points, squared_distances

MAX_REPORTED_VIOLATIONS = 100


def beta_of(U: Union[MembershipMatrix, np.ndarray]) -> float:
    """(k/n) * min_j sum_i U_ij, the normalized size of the smallest cluster"""
    entries = U.entries if isinstance(U, MembershipMatrix) else np.asarray(U, dtype=float)
    n, k = entries.shape
    return float(k / n * entries.sum(axis=0).min())


def sort_by_distance(X: PointsLike, v) -> np.ndarray:
    """Indices of X in ascending distance from v; ties keep index order"""
    points = as_points(X)
    v = as_centers(v, points.shape[1])[0]
    diff = points - v
    d2 = np.einsum("ij,ij->i", diff, diff)
    return np.argsort(d2, kind="stable")


def gamma_of(X: PointsLike, centers) -> float:
    """Largest radius around every center that leaves its distance order intact.

    For a center mu and points a, b with ||mu - x_a|| < ||mu - x_b||, the
    order flips once mu crosses the perpendicular bisector of (x_a, x_b), at
    distance (||x_b - mu||^2 - ||x_a - mu||^2) / (2 ||x_b - x_a||).
    """
    points = as_points(X)
    mu = as_centers(centers, points.shape[1])
    if points.shape[0] < 2:
        return float("inf")

    separation = pdist(points)
    if np.any(separation == 0):
        return 0.0
    d2 = squared_distances(points, mu)
    gamma = np.inf
    for j in range(mu.shape[0]):
        gaps = pdist(d2[:, j].reshape(-1, 1), metric="cityblock")
        gamma = min(gamma, float(np.min(gaps / (2.0 * separation))))
        if gamma == 0:
            break
    return gamma


class CenterViolation(BaseModel):
    cluster: int
    deviation: float


class ConsistencyReport(BaseModel):
    """Outcome of the two consistency conditions.

    Monotonicity violations are (i, l, j) triples: element i is strictly
    closer to center j than element l but has the smaller membership.
    """

    consistent: bool
    center_violations: List[CenterViolation] = Field(default_factory=list)
    monotonicity_violations: List[Tuple[int, int, int]] = Field(default_factory=list)
    n_monotonicity_violations: int = 0

    @property
    def centers_ok(self) -> bool:
        return not self.center_violations

    @property
    def monotone(self) -> bool:
        return self.n_monotonicity_violations == 0

    def __bool__(self) -> bool:
        return self.consistent


def _monotonicity_violations(d2: np.ndarray, u: np.ndarray, j: int, tol: float):
    """Compare every element against the smallest membership of all strictly
    closer elements; distance ties carry no ordering constraint."""
    order = np.argsort(d2, kind="stable")
    eps = 1e-12 * max(1.0, float(d2.max()))
    found: List[Tuple[int, int, int]] = []
    count = 0

    closer_min, closer_idx = np.inf, -1
    group_min, group_idx = np.inf, -1
    group_d = None
    for p in order:
        p = int(p)
        if group_d is not None and d2[p] - group_d > eps:
            if group_min < closer_min:
                closer_min, closer_idx = group_min, group_idx
            group_min, group_idx = np.inf, -1
            group_d = d2[p]
        elif group_d is None:
            group_d = d2[p]
        if u[p] > closer_min + tol:
            count += 1
            if len(found) < MAX_REPORTED_VIOLATIONS:
                found.append((closer_idx, p, j))
        if u[p] < group_min:
            group_min, group_idx = u[p], p
    return found, count


def is_consistent_center_based(
    X: PointsLike,
    P: Clustering,
    alpha: float,
    tol: float = 1e-9,
) -> ConsistencyReport:
    """Check that centers are the weighted means of the memberships and that
    memberships never increase with distance from their center."""
    points = as_points(X)
    U = P.memberships
    scale = max(1.0, float(np.max(np.abs(points))))

    center_violations: List[CenterViolation] = []
    try:
        expected = update_centers(points, U, alpha)
        deviation = np.linalg.norm(expected - P.centers, axis=1)
        for j in np.flatnonzero(deviation > tol * scale):
            center_violations.append(CenterViolation(cluster=int(j), deviation=float(deviation[j])))
    except DegenerateClusterError as e:
        center_violations.append(CenterViolation(cluster=e.cluster, deviation=float("inf")))

    d2 = squared_distances(points, P.centers)
    reported: List[Tuple[int, int, int]] = []
    total = 0
    for j in range(P.k):
        found, count = _monotonicity_violations(d2[:, j], U[:, j], j, tol)
        total += count
        reported.extend(found[: MAX_REPORTED_VIOLATIONS - len(reported)])

    return ConsistencyReport(
        consistent=not center_violations and total == 0,
        center_violations=center_violations,
        monotonicity_violations=reported,
        n_monotonicity_violations=total,
    )
