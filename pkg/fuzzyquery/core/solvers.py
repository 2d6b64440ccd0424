"""Query solvers recovering a hidden fuzzy clustering from membership answers."""

import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from fuzzyquery.core.logging_service import get_logging_service
from fuzzyquery.core.oracle import MembershipOracle
from fuzzyquery.core.search import binary_search2, estimate_memberships_grid
from fuzzyquery.core.structure import sort_by_distance
from fuzzyquery.errors import (
    ConfigError,
    DegenerateClusterError,
    DegenerateSampleError,
    DegenerateStageError,
    InvalidQueryError,
)
from fuzzyquery.schemas.clustering import Clustering
from fuzzyquery.schemas.solver import SolverConfig, SolverResult
from fuzzyquery.utils.helpers import PointsLike, as_points, ceil_log2, grid_top, spawn_rng


class StageCounter:
    """Attributes ledger growth to named solver stages"""

    def __init__(self, oracle: MembershipOracle, solver: str):
        self.oracle = oracle
        self.solver = solver
        self.counts: Dict[str, int] = {}
        self._mark = oracle.ledger.total
        self._logger = get_logging_service()

    def close(self, stage: str):
        now = self.oracle.ledger.total
        spent = now - self._mark
        self.counts[stage] = self.counts.get(stage, 0) + spent
        self._mark = now
        self._logger.log_stage(self.solver, stage, spent)


def _check_oracle(points: np.ndarray, oracle: MembershipOracle, k: int):
    if oracle.n != points.shape[0]:
        raise ConfigError(f"oracle answers for {oracle.n} elements, dataset has {points.shape[0]}")
    if oracle.k != k:
        raise ConfigError(f"oracle target has {oracle.k} clusters, solver asked for {k}")


def weighted_center(points: np.ndarray, weights: np.ndarray) -> Optional[np.ndarray]:
    """sum w x / sum w, or None when the weights carry no mass"""
    total = float(np.sum(weights))
    if total <= 0:
        return None
    return (weights @ points) / total


def renormalize(U_hat: np.ndarray, clamp: bool = False) -> np.ndarray:
    """Spread each row's deficit evenly: U_hat += (1 - row sum) / k.

    Entries may leave [0, 1] by at most the grid width; `clamp` clips them
    and rescales rows to sum to 1.
    """
    k = U_hat.shape[1]
    out = U_hat + (1.0 - U_hat.sum(axis=1, keepdims=True)) / k
    if clamp:
        out = np.clip(out, 0.0, 1.0)
        out = out / out.sum(axis=1, keepdims=True)
    return out


def _powered(values, alpha: float) -> np.ndarray:
    return np.clip(np.asarray(values, dtype=float), 0.0, None) ** alpha


def estimate_center_uniform(
    X: PointsLike,
    oracle: MembershipOracle,
    j: int,
    m: int,
    alpha: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Center of cluster j from m uniform samples (with replacement), m queries"""
    if m < 1:
        raise ConfigError(f"sample size must be >= 1, got {m}")
    points = as_points(X)
    sample = rng.integers(points.shape[0], size=m)
    u = np.array([oracle.membership_query(i, j) for i in sample])
    center = weighted_center(points[sample], _powered(u, alpha))
    if center is None:
        raise DegenerateSampleError(j, m)
    return center


def _sample_all_clusters(
    points: np.ndarray, oracle: MembershipOracle, k: int, m: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    sample = rng.integers(points.shape[0], size=m)
    U_sample = np.array([oracle.membership_row(i) for i in sample]).reshape(m, k)
    return sample, U_sample


def _start(solver: str, points: np.ndarray, k: int, cfg: SolverConfig):
    get_logging_service().log_solver_start(solver, points.shape[0], k, cfg.seed)


def _finish(
    solver: str,
    oracle: MembershipOracle,
    centers: np.ndarray,
    U_hat: np.ndarray,
    counter: StageCounter,
    cfg: SolverConfig,
    order: List[int],
    diagnostics: Optional[dict] = None,
) -> SolverResult:
    get_logging_service().log_solver_complete(solver, sum(counter.counts.values()), counter.counts)
    return SolverResult(
        solver=solver,
        estimate=Clustering(centers=centers, memberships=U_hat),
        ledger_snapshot=oracle.ledger.snapshot(),
        per_stage_counts=counter.counts,
        cluster_order=order,
        seed=cfg.seed,
        config=cfg,
        diagnostics=diagnostics or {},
    )


def two_phase_solve(X: PointsLike, oracle: MembershipOracle, k: int, cfg: SolverConfig) -> SolverResult:
    """Estimate every center from one shared uniform sample, then grid each cluster"""
    solver = "two-phase"
    points = as_points(X)
    if k < 1:
        raise ConfigError("k must be >= 1")
    _check_oracle(points, oracle, k)
    _start(solver, points, k, cfg)
    counter = StageCounter(oracle, solver)

    sample, U_sample = _sample_all_clusters(points, oracle, k, cfg.m, spawn_rng(cfg.seed, solver, "sample"))
    W = _powered(U_sample, cfg.alpha)
    centers = np.empty((k, points.shape[1]))
    for j in range(k):
        center = weighted_center(points[sample], W[:, j])
        if center is None:
            raise DegenerateSampleError(j, cfg.m)
        centers[j] = center
    counter.close("sample")

    U_hat = np.column_stack(
        [estimate_memberships_grid(points, oracle, centers[j], j, cfg.eta).values for j in range(k)]
    )
    counter.close("grid")

    return _finish(solver, oracle, centers, renormalize(U_hat, cfg.clamp), counter, cfg, list(range(k)))


def sample_bins(bins: np.ndarray, r: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Draw min(r, |bin|) elements with replacement from every nonempty bin.

    Returns the sampled element indices and their importance weights
    |bin| / (draws from that bin), so sum(weights * f[indices]) is an
    unbiased estimate of sum(f).
    """
    indices: List[np.ndarray] = []
    weights: List[np.ndarray] = []
    for s in np.unique(bins):
        members = np.flatnonzero(bins == s)
        draws = min(r, members.size)
        indices.append(rng.choice(members, size=draws, replace=True))
        weights.append(np.full(draws, members.size / draws))
    return np.concatenate(indices), np.concatenate(weights)


def sequential_solve(X: PointsLike, oracle: MembershipOracle, k: int, cfg: SolverConfig) -> SolverResult:
    """Discover clusters one at a time, binning elements by the membership
    already explained so small clusters are sampled where they live."""
    solver = "sequential"
    points = as_points(X)
    n = points.shape[0]
    if k < 1:
        raise ConfigError("k must be >= 1")
    _check_oracle(points, oracle, k)
    _start(solver, points, k, cfg)
    counter = StageCounter(oracle, solver)

    sample, U_sample = _sample_all_clusters(points, oracle, k, cfg.m, spawn_rng(cfg.seed, solver, "sample"))
    W = _powered(U_sample, cfg.alpha)
    t1 = int(np.argmax(W.sum(axis=0)))
    centers = np.empty((k, points.shape[1]))
    center = weighted_center(points[sample], W[:, t1])
    if center is None:
        raise DegenerateSampleError(t1, cfg.m)
    centers[t1] = center
    order = [t1]
    counter.close("sample")

    top = grid_top(cfg.eta1)
    explained = np.zeros(n)
    for ell in range(1, k):
        t = order[-1]
        explained += estimate_memberships_grid(points, oracle, centers[t], t, cfg.eta1).values
        counter.close(f"grid_{ell}")

        bins = np.clip(np.rint(explained / cfg.eta1), 0, top).astype(int)
        idx, weights = sample_bins(bins, cfg.r, spawn_rng(cfg.seed, solver, "bins", ell))
        unprocessed = [j for j in range(k) if j not in order]
        U_bins = np.array([oracle.membership_row(i, unprocessed) for i in idx]).reshape(len(idx), len(unprocessed))
        W_bins = weights[:, None] * _powered(U_bins, cfg.alpha)
        scores = W_bins.sum(axis=0)
        if not np.any(scores > 0):
            raise DegenerateStageError(ell)
        best = int(np.argmax(scores))
        t_next = unprocessed[best]
        centers[t_next] = weighted_center(points[idx], W_bins[:, best])
        order.append(t_next)
        counter.close(f"bins_{ell}")

    U_hat = np.column_stack(
        [estimate_memberships_grid(points, oracle, centers[j], j, cfg.eta2).values for j in range(k)]
    )
    counter.close("grid_final")

    return _finish(solver, oracle, centers, renormalize(U_hat, cfg.clamp), counter, cfg, order)


class Membership2Result(BaseModel):
    """Adaptive partition of the elements by membership to the second cluster.

    Index sets are element indices. `special` holds elements whose
    membership was queried individually, with exact values in `estimates`.
    """

    near: List[int]
    special: List[int]
    bins: List[List[int]]
    bin_levels: List[float]
    estimates: List[float]
    queries: int


def membership2(
    X: PointsLike,
    oracle: MembershipOracle,
    center_hat_t1,
    t1: int,
    t2: int,
) -> Membership2Result:
    """Geometric halving of the second cluster's membership along the order
    from the first center.

    Walking inward from the farthest element, each level halves the
    membership threshold; a level spanning at least ceil(log2 n) positions
    becomes a bin, a shorter one is queried element by element. Whatever
    remains nearest the first center after 3 ceil(log2 n) levels gets 0.
    """
    points = as_points(X)
    n = points.shape[0]
    L = max(1, ceil_log2(n))
    pi = sort_by_distance(points, center_hat_t1)
    start = oracle.ledger.total
    known: Dict[int, float] = {}

    def second(pos: int) -> float:
        # 1-based position -> membership to t2, querying t1 once per element
        i = int(pi[pos - 1])
        if i not in known:
            known[i] = 1.0 - oracle.membership_query(i, t1)
        return known[i]

    estimates = np.zeros(n)
    special: List[int] = []
    bins: List[List[int]] = []
    bin_levels: List[float] = []

    level = second(n)
    estimates[pi[n - 1]] = level
    special.append(int(pi[n - 1]))
    p = n
    for _ in range(2, 3 * L + 1):
        if p == 1:
            break
        level = level / 2.0
        p_new = binary_search2(oracle, pi, t1, level)
        if p - p_new >= L:
            # positions p_new .. p-1 form one bin valued at its nearest member
            value = second(p_new)
            members = [int(i) for i in pi[p_new - 1 : p - 1]]
            estimates[members] = value
            bins.append(members)
            bin_levels.append(value)
            p = p_new
        else:
            p_new = max(1, p - L)
            for pos in range(p_new, p):
                i = int(pi[pos - 1])
                estimates[i] = second(pos)
                special.append(i)
            level = second(p_new)
            p = p_new

    near = [int(i) for i in pi[: p - 1]]
    estimates[near] = 0.0
    return Membership2Result(
        near=near,
        special=special,
        bins=bins,
        bin_levels=bin_levels,
        estimates=estimates.tolist(),
        queries=oracle.ledger.total - start,
    )


def two_cluster_solve(X: PointsLike, oracle: MembershipOracle, cfg: SolverConfig) -> SolverResult:
    """Two-cluster solver whose query count does not depend on cluster balance"""
    solver = "two-cluster"
    points = as_points(X)
    n = points.shape[0]
    k = 2
    if n < 2:
        raise InvalidQueryError("the two-cluster solver needs at least two elements")
    _check_oracle(points, oracle, k)
    _start(solver, points, k, cfg)
    counter = StageCounter(oracle, solver)

    sample, U_sample = _sample_all_clusters(points, oracle, k, cfg.m, spawn_rng(cfg.seed, solver, "sample"))
    W = _powered(U_sample, cfg.alpha)
    t1 = int(np.argmax(W.sum(axis=0)))
    t2 = 1 - t1
    centers = np.empty((k, points.shape[1]))
    center = weighted_center(points[sample], W[:, t1])
    if center is None:
        raise DegenerateSampleError(t1, cfg.m)
    centers[t1] = center
    counter.close("sample")

    partition = membership2(points, oracle, centers[t1], t1, t2)
    counter.close("membership2")

    rng = spawn_rng(cfg.seed, solver, "bins")
    idx_parts: List[np.ndarray] = []
    weight_parts: List[np.ndarray] = []
    for group in partition.bins + ([partition.near] if partition.near else []):
        idx_parts.append(rng.choice(np.asarray(group), size=cfg.r, replace=True))
        weight_parts.append(np.full(cfg.r, len(group) / cfg.r))
    if idx_parts:
        idx = np.concatenate(idx_parts)
        sampled = np.array([oracle.membership_query(i, t2) for i in idx])
        weights = np.concatenate(weight_parts) * _powered(sampled, cfg.alpha)
    else:
        idx = np.empty(0, dtype=int)
        weights = np.empty(0)
    exact = np.asarray(partition.special, dtype=int)
    exact_weights = _powered(np.asarray(partition.estimates)[exact], cfg.alpha)
    center = weighted_center(
        np.vstack([points[idx], points[exact]]),
        np.concatenate([weights, exact_weights]),
    )
    if center is None:
        raise DegenerateClusterError(t2)
    centers[t2] = center
    counter.close("second_center")

    grid = estimate_memberships_grid(points, oracle, centers[t2], t2, cfg.eta)
    U_hat = np.empty((n, k))
    U_hat[:, t2] = grid.values
    U_hat[:, t1] = 1.0 - grid.values
    counter.close("grid")

    diagnostics = {
        "n_bins": len(partition.bins) + (1 if partition.near else 0),
        "n_special": len(partition.special),
        "near_size": len(partition.near),
    }
    return _finish(solver, oracle, centers, renormalize(U_hat, cfg.clamp), counter, cfg, [t1, t2], diagnostics)


class TheoremBudget(BaseModel):
    solver: str
    m: int
    r: Optional[int] = None
    queries: int


def two_cluster_query_bound(n: int, m: int, r: int, eta: float) -> int:
    """Worst-case ledger total of two_cluster_solve; free of any cluster-size term"""
    L = max(1, ceil_log2(n))
    search = ceil_log2(n + 1)
    levels = 3 * L - 1
    partition = 1 + levels * (search + max(1, L))
    sampling = 3 * L * r
    grid = (grid_top(eta) + 1) * search
    return 2 * m + partition + sampling + grid


def grid_query_bound(n: int, eta: float) -> int:
    """Most queries one estimate_memberships_grid call can make"""
    return (grid_top(eta) + 1) * ceil_log2(n + 1)


def theorem_budget(
    solver: str,
    n: int,
    k: int,
    radius: float,
    eps: float,
    delta: float,
    c: float,
    alpha: float = 2.0,
    beta: float = 1.0,
    eta: float = 0.1,
    eta1: float = 0.1,
    eta2: float = 0.1,
) -> TheoremBudget:
    """Sample sizes and query totals of the guarantee statements for a chosen
    constant c. Reported only; solvers never apply them."""
    if c <= 0 or eps <= 0 or not 0 < delta < 1:
        raise ConfigError("theorem budget needs c > 0, eps > 0 and delta in (0, 1)")
    R = radius
    if solver == "two-phase":
        m = math.ceil((R * k ** alpha / (eps * beta ** alpha)) ** 4 * c * math.log(k / delta))
        m = max(m, 1)
        return TheoremBudget(solver=solver, m=m, queries=k * m + k * grid_query_bound(n, eta))
    if solver == "sequential":
        m = max(1, math.ceil((R * k ** alpha / eps) ** 4 * c * math.log(2 * k / delta)))
        r = max(
            1,
            math.ceil(
                c * R ** 4 * k ** (4 * alpha) / (eps ** 4 * beta ** (4 * alpha - 4)) * math.log(4 * k / (eta1 * delta))
            ),
        )
        bins = grid_top(eta1) + 1
        queries = (
            k * m
            + (k - 1) * bins * r * k
            + (k - 1) * grid_query_bound(n, eta1)
            + k * grid_query_bound(n, eta2)
        )
        return TheoremBudget(solver=solver, m=m, r=r, queries=queries)
    if solver == "two-cluster":
        m = max(1, math.ceil(c * (R / eps) ** 4 * math.log(4 / delta)))
        r = max(1, math.ceil(c * (R / eps) ** 4 * math.log(2 / (eta * delta))))
        return TheoremBudget(solver=solver, m=m, r=r, queries=two_cluster_query_bound(n, m, r, eta))
    raise ConfigError(f"unknown solver '{solver}'")


SOLVERS = ("two-phase", "sequential", "two-cluster")


def solve(solver: str, X: PointsLike, oracle: MembershipOracle, k: int, cfg: SolverConfig) -> SolverResult:
    if solver == "two-phase":
        return two_phase_solve(X, oracle, k, cfg)
    if solver == "sequential":
        return sequential_solve(X, oracle, k, cfg)
    if solver == "two-cluster":
        if k != 2:
            raise ConfigError("the two-cluster solver needs k = 2")
        return two_cluster_solve(X, oracle, cfg)
    raise ConfigError(f"unknown solver '{solver}'", {"choices": list(SOLVERS)})
