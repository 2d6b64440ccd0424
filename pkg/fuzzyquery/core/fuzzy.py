"""Fuzzy k-means mathematics: objective, alternating updates, Xie-Beni index."""

from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.spatial.distance import pdist

from fuzzyquery.config import settings
from fuzzyquery.core.logging_service import get_logging_service
from fuzzyquery.errors import (
    CoincidentCentersError,
    ConfigError,
    DegenerateClusterError,
    ShapeError,
)
from fuzzyquery.schemas.clustering import Clustering
from fuzzyquery.utils.helpers import (
    PointsLike,
    as_centers,
    as_points,
    spawn_rng,
    squared_distances,
)


def _check_alpha(alpha: float):
    if not alpha > 1:
        raise ConfigError(f"fuzzifier alpha must be > 1, got {alpha}")


def _memberships_of(points: np.ndarray, P: Clustering) -> np.ndarray:
    U = P.memberships
    if U.shape[0] != points.shape[0]:
        raise ShapeError(f"{U.shape[0]} membership rows for {points.shape[0]} points")
    if P.centers.shape[1] != points.shape[1]:
        raise ShapeError(f"centers have dimension {P.centers.shape[1]}, points {points.shape[1]}")
    return U


def _powered(U: np.ndarray, alpha: float) -> np.ndarray:
    return np.clip(U, 0.0, None) ** alpha


def fuzzy_objective(X: PointsLike, P: Clustering, alpha: float) -> float:
    """J_fm = sum_ij U_ij^alpha ||x_i - mu_j||^2"""
    points = as_points(X)
    U = _memberships_of(points, P)
    d2 = squared_distances(points, P.centers)
    return float(np.sum(_powered(U, alpha) * d2))


def update_memberships(X: PointsLike, centers, alpha: float) -> np.ndarray:
    """Optimal memberships for fixed centers.

    A point within `coincidence_tol` of one or more centers splits its mass
    equally among them, the limit of the closed form.
    """
    _check_alpha(alpha)
    points = as_points(X)
    mu = as_centers(centers, points.shape[1])
    d2 = squared_distances(points, mu)

    coincident = d2 < settings.coincidence_tol ** 2
    hit = coincident.any(axis=1)
    U = np.empty_like(d2)
    if hit.any():
        c = coincident[hit].astype(float)
        U[hit] = c / c.sum(axis=1, keepdims=True)
    free = ~hit
    if free.any():
        # log domain: d^(-2/(alpha-1)) overflows for alpha close to 1
        logw = -np.log(d2[free]) / (alpha - 1.0)
        logw -= logw.max(axis=1, keepdims=True)
        w = np.exp(logw)
        U[free] = w / w.sum(axis=1, keepdims=True)
    return U


def update_centers(X: PointsLike, U, alpha: float) -> np.ndarray:
    """mu_j = sum_i U_ij^alpha x_i / sum_i U_ij^alpha"""
    points = as_points(X)
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[0] != points.shape[0]:
        raise ShapeError(f"memberships of shape {U.shape} for {points.shape[0]} points")
    W = _powered(U, alpha)
    mass = W.sum(axis=0)
    for j in np.flatnonzero(mass <= 0):
        raise DegenerateClusterError(int(j))
    return (W.T @ points) / mass[:, None]


class LloydResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    clustering: Clustering
    objective_trace: List[float]
    n_iter: int
    converged: bool
    reseeds: int


def lloyd_fuzzy(
    X: PointsLike,
    k: int,
    alpha: float,
    init: Union[None, int, np.ndarray] = None,
    max_iter: int = 300,
    tol: float = 1e-9,
    seed: int = 0,
) -> LloydResult:
    """Alternate membership and center updates until the objective stalls.

    `init` is either k seed centers or an integer seed for picking k distinct
    data points. A cluster losing all mass mid-run is reseeded to a uniformly
    random data point.
    """
    _check_alpha(alpha)
    points = as_points(X)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ConfigError(f"need 1 <= k <= n, got k={k}, n={n}")

    if init is None or isinstance(init, (int, np.integer)):
        init_seed = seed if init is None else int(init)
        pick = spawn_rng(init_seed, "lloyd-init").choice(n, size=k, replace=False)
        centers = points[pick].copy()
    else:
        centers = as_centers(init, points.shape[1]).copy()
        if centers.shape[0] != k:
            raise ShapeError(f"{centers.shape[0]} initial centers for k={k}")

    rng = spawn_rng(seed, "lloyd-reseed")
    logger = get_logging_service()
    scale = max(1.0, float(np.max(np.abs(points))))

    def reseed(dead: np.ndarray, it: int):
        nonlocal reseeds
        for j in dead:
            idx = int(rng.integers(n))
            centers[j] = points[idx]
            reseeds += 1
            logger.log_reseed(int(j), it, idx)

    trace: List[float] = []
    reseeds = 0
    converged = False
    prev = np.inf
    it = 0
    U = update_memberships(points, centers, alpha)
    for it in range(1, max_iter + 1):
        U = update_memberships(points, centers, alpha)
        W = _powered(U, alpha)
        mass = W.sum(axis=0)
        dead = np.flatnonzero(mass <= 0)
        if dead.size:
            reseed(dead, it)
            prev = np.inf
            continue

        new_centers = (W.T @ points) / mass[:, None]
        shift = float(np.max(np.linalg.norm(new_centers - centers, axis=1)))
        centers = new_centers
        J = float(np.sum(W * squared_distances(points, centers)))
        trace.append(J)
        if prev - J < tol or shift <= tol * scale:
            converged = True
            break
        prev = J

    # a reseed on the last pass leaves U stale
    U = update_memberships(points, centers, alpha)
    for _ in range(k):
        dead = np.flatnonzero(_powered(U, alpha).sum(axis=0) <= 0)
        if not dead.size:
            break
        reseed(dead, it)
        U = update_memberships(points, centers, alpha)

    clustering = Clustering(centers=update_centers(points, U, alpha), memberships=U)
    return LloydResult(
        clustering=clustering,
        objective_trace=trace,
        n_iter=it,
        converged=converged,
        reseeds=reseeds,
    )


def min_center_separation(centers: np.ndarray) -> float:
    """min_{i != j} ||mu_i - mu_j||^2"""
    if centers.shape[0] < 2:
        raise ConfigError("center separation needs k >= 2")
    return float(np.min(pdist(centers, metric="sqeuclidean")))


def xie_beni(X: PointsLike, P: Clustering, alpha: float) -> float:
    """J_fm / (n k min_{i != j} ||mu_i - mu_j||^2)"""
    points = as_points(X)
    if P.k < 2:
        raise ConfigError("Xie-Beni index needs k >= 2")
    sep = min_center_separation(P.centers)
    if sep <= settings.coincidence_tol ** 2:
        raise CoincidentCentersError("Xie-Beni index undefined for coincident centers")
    return fuzzy_objective(points, P, alpha) / (points.shape[0] * P.k * sep)


class XieBeniBound(BaseModel):
    xie_beni: float
    lower: float
    upper: float

    def contains(self, value: float, rtol: float = 1e-12) -> bool:
        slack = rtol * max(1.0, abs(value))
        return self.lower - slack <= value <= self.upper + slack


def xie_beni_stability_bound(
    X: PointsLike,
    P: Clustering,
    alpha: float,
    eps1: float,
    eps2: float,
    radius: Optional[float] = None,
) -> XieBeniBound:
    """Explicit bounds on XB of any clustering whose centers are within eps1
    and memberships within eps2 (entrywise, in [0, 1]) of P.

    Uses the chain ||x - mu_hat||^2 <= ||x - mu||^2 + 4R eps1 + eps1^2,
    ||x - mu_hat||^2 <= 2[R^2 + (R + eps1)^2], min separation moving by at
    most 8R eps1 + 4 eps1^2, and the mean-value bound
    |U_hat^a - U^a| <= a (1 + eps2)^(a - 1) eps2 for the membership powers.
    """
    _check_alpha(alpha)
    points = as_points(X)
    n, k = points.shape[0], P.k
    R = radius
    if R is None:
        R = float(max(np.max(np.linalg.norm(points, axis=1)), np.max(np.linalg.norm(P.centers, axis=1))))

    xb = xie_beni(points, P, alpha)
    J = fuzzy_objective(points, P, alpha)
    S = min_center_separation(P.centers)

    spread = 2.0 * (R ** 2 + (R + eps1) ** 2)
    power_up = alpha * (1.0 + eps2) ** (alpha - 1.0) * eps2
    power_down = alpha * eps2

    J_up = J + n * (4.0 * R * eps1 + eps1 ** 2) + n * k * power_up * spread
    J_down = max(0.0, J - n * 4.0 * R * eps1 - n * k * power_down * spread)
    S_down = S - 8.0 * R * eps1 - 4.0 * eps1 ** 2
    S_up = S + 8.0 * R * eps1 + 4.0 * eps1 ** 2

    upper = J_up / (n * k * S_down) if S_down > 0 else np.inf
    lower = J_down / (n * k * S_up)
    return XieBeniBound(xie_beni=xb, lower=lower, upper=upper)
