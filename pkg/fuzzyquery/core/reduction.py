"""Membership answers simulated from pairwise and triplet similarity queries.

Two constructive routes to an anchor basis: k mutually orthogonal (hence
pure) elements found from pairwise similarities, or a CP decomposition of the
third moment tensor of k sampled anchors.
"""

from itertools import combinations, combinations_with_replacement, permutations
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy import linalg

from fuzzyquery.config import settings
from fuzzyquery.core.logging_service import get_logging_service
from fuzzyquery.core.oracle import TargetOracle
from fuzzyquery.errors import (
    CapabilityError,
    ConditioningError,
    DecompositionError,
    RankError,
    ReductionUnavailableError,
)
from fuzzyquery.schemas.oracle import QueryLedger
from fuzzyquery.schemas.reduction import AnchorSet, MomentTensor, ReductionParams
from fuzzyquery.utils.helpers import spawn_rng


def _zero_clique(adjacent: np.ndarray, k: int) -> Optional[List[int]]:
    """Some k mutually adjacent vertices, by backtracking from high degree"""
    order = list(np.argsort(-adjacent.sum(axis=1), kind="stable"))

    def extend(chosen: List[int], pool: List[int]) -> Optional[List[int]]:
        if len(chosen) == k:
            return chosen
        for pos, v in enumerate(pool):
            if len(chosen) + len(pool) - pos < k:
                return None
            rest = [u for u in pool[pos + 1 :] if adjacent[v, u]]
            found = extend(chosen + [v], rest)
            if found is not None:
                return found
        return None

    return extend([], order)


def find_pure_anchors(sim_oracle: TargetOracle, candidates: Sequence[int], k: int) -> Optional[AnchorSet]:
    """k candidates with pairwise similarity 0, each therefore pure in a
    distinct cluster, or None.

    k simplex rows with disjoint supports in k coordinates are one-hot. The
    set is confirmed by checking that every other candidate's similarities
    to the anchors sum to 1. Self-similarities are never queried.
    """
    candidates = [int(c) for c in dict.fromkeys(candidates)]
    size = len(candidates)
    if size < k:
        return None

    gram = np.full((size, size), np.nan)
    for a, b in combinations(range(size), 2):
        gram[a, b] = gram[b, a] = sim_oracle.pair_similarity(candidates[a], candidates[b])

    zero = np.abs(np.nan_to_num(gram, nan=1.0)) <= settings.zero_similarity_tol
    np.fill_diagonal(zero, False)
    if k == 1:
        chosen = [0]
    else:
        chosen = _zero_clique(zero, k)
        if chosen is None:
            return None

    others = [a for a in range(size) if a not in chosen]
    if others:
        totals = np.array([gram[a, chosen].sum() for a in others])
        if np.max(np.abs(totals - 1.0)) > settings.residual_tol:
            return None

    return AnchorSet(
        indices=[candidates[a] for a in chosen],
        basis=np.eye(k),
        is_pure=True,
        condition_number=1.0,
    )


def _row_residual(w: np.ndarray) -> float:
    return float(max(np.max(-w, initial=0.0), np.max(w - 1.0, initial=0.0), abs(w.sum() - 1.0)))


def membership_from_pairwise(sim_oracle: TargetOracle, anchors: AnchorSet, i: int) -> np.ndarray:
    """Membership row of element i from its k similarities to the anchors"""
    i = int(i)
    if i in anchors.indices:
        return anchors.basis[anchors.indices.index(i)].copy()

    s = np.array([sim_oracle.pair_similarity(i, a) for a in anchors.indices])
    if anchors.is_pure:
        w = s
    else:
        cond = anchors.condition_number
        if cond is None:
            cond = float(np.linalg.cond(anchors.basis))
        if not np.isfinite(cond) or cond > settings.condition_limit:
            raise ConditioningError(f"anchor basis is singular (condition number {cond:.3e})", {"anchors": anchors.indices})
        # s_t = <U_i, V_t>, i.e. s = V w
        w = linalg.solve(anchors.basis, s)

    residual = _row_residual(w)
    if residual > settings.residual_tol:
        w = np.clip(w, 0.0, 1.0)
        total = w.sum()
        w = w / total if total > 0 else np.full_like(w, 1.0 / w.size)
        get_logging_service().log_row_clamped(i, residual)
    return w


def build_moment_tensor(oracle: TargetOracle, anchors: Sequence[int]) -> MomentTensor:
    """Third moment of the anchors' membership rows, one triplet query per
    unordered index triple"""
    if not oracle.supports_repeated_triplets:
        raise CapabilityError(
            "moment tensor diagonals need repeated-index triplet queries, "
            "which this oracle does not answer"
        )
    anchors = [int(a) for a in anchors]
    a = len(anchors)
    entries = np.zeros((a, a, a))
    for triple in combinations_with_replacement(range(a), 3):
        value = oracle.triplet_similarity(*(anchors[t] for t in triple), allow_repeats=True)
        for p, q, s in set(permutations(triple)):
            entries[p, q, s] = value
    return MomentTensor(anchors=anchors, entries=entries)


def _cube(v: np.ndarray) -> np.ndarray:
    return np.einsum("i,j,k->ijk", v, v, v)


def jennrich_decompose(
    A: MomentTensor,
    R: int,
    rng: np.random.Generator,
    max_retries: int = 5,
    eigen_gap: float = 1e-8,
) -> List[np.ndarray]:
    """Recover z_1..z_R with A = sum_r z_r (x) z_r (x) z_r.

    Contracts A with two random unit vectors, takes the top R eigenvectors
    of T1 pinv(T2), fits their cube coefficients by least squares and
    rescales by the real cube root. Nearly repeated or complex eigenvalues
    trigger a fresh draw; a rank-deficient slice gets one fresh draw.
    """
    T = A.entries
    a = T.shape[0]
    if not 1 <= R <= a:
        raise RankError(f"cannot extract {R} factors from a {a}-dimensional tensor")
    norm_T = float(np.linalg.norm(T))
    rank_failures = 0
    last_residual = np.inf

    for _ in range(max_retries + 1):
        x = rng.standard_normal(a)
        y = rng.standard_normal(a)
        x /= np.linalg.norm(x)
        y /= np.linalg.norm(y)
        T1 = np.tensordot(T, x, axes=([2], [0]))
        T2 = np.tensordot(T, y, axes=([2], [0]))
        if np.linalg.matrix_rank(T1) < R:
            rank_failures += 1
            if rank_failures > 1:
                raise RankError(f"tensor slice has rank below {R}")
            continue

        vals, vecs = linalg.eig(T1 @ np.linalg.pinv(T2))
        top = np.argsort(-np.abs(vals), kind="stable")[:R]
        vals, vecs = vals[top], vecs[:, top]
        scale = max(1.0, float(np.max(np.abs(vals))))
        if np.any(np.abs(vals.imag) > eigen_gap * scale):
            continue
        lam = vals.real
        if R > 1 and np.min(np.abs(lam[:, None] - lam[None, :])[np.triu_indices(R, 1)]) < eigen_gap * scale:
            continue

        V = vecs.real
        V = V / np.linalg.norm(V, axis=0)
        design = np.column_stack([_cube(V[:, r]).ravel() for r in range(R)])
        coef, *_ = np.linalg.lstsq(design, T.ravel(), rcond=None)
        Z = V * np.cbrt(coef)
        Z = np.where((Z < 0) & (Z > -1e-6), 0.0, Z)

        rebuilt = sum(_cube(Z[:, r]) for r in range(R))
        last_residual = float(np.linalg.norm(T - rebuilt))
        if last_residual <= 1e-6 * max(norm_T, 1e-300):
            return [Z[:, r].copy() for r in range(R)]

    raise DecompositionError(
        "tensor decomposition did not reach the residual tolerance",
        {"residual": last_residual, "norm": norm_T},
    )


class SimilarityMembershipOracle:
    """Membership oracle served from similarity queries through an anchor basis.

    Rows are cached, so each element costs k pairwise queries at most once.
    Cluster labels match the hidden target up to one fixed permutation.
    """

    def __init__(self, sim_oracle: TargetOracle, anchors: AnchorSet, path: str):
        self.sim_oracle = sim_oracle
        self.anchors = anchors
        self.path = path
        self._rows: Dict[int, np.ndarray] = {}

    @property
    def ledger(self) -> QueryLedger:
        return self.sim_oracle.ledger

    @property
    def n(self) -> int:
        return self.sim_oracle.n

    @property
    def k(self) -> int:
        return self.anchors.k

    def row(self, i: int) -> np.ndarray:
        i = int(i)
        if i not in self._rows:
            self._rows[i] = membership_from_pairwise(self.sim_oracle, self.anchors, i)
        return self._rows[i]

    def membership_query(self, i: int, j: int) -> float:
        return float(self.row(i)[int(j)])

    def membership_row(self, i: int, clusters: Optional[Iterable[int]] = None) -> np.ndarray:
        row = self.row(i)
        if clusters is None:
            return row.copy()
        return row[list(clusters)]


def membership_oracle_from_similarity(
    sim_oracle: TargetOracle,
    k: int,
    params: Optional[ReductionParams] = None,
    rng: Optional[np.random.Generator] = None,
) -> SimilarityMembershipOracle:
    """Bootstrap an anchor basis, trying pure anchors before the tensor route.

    Without `rng` the draws come from `params.seed`.
    """
    params = params or ReductionParams()
    if rng is None:
        rng = spawn_rng(params.seed, "reduction")
    logger = get_logging_service()
    n = sim_oracle.n
    start_pairs = sim_oracle.ledger.pair_count
    start_triplets = sim_oracle.ledger.triplet_count

    pool = rng.choice(n, size=min(n, params.candidates), replace=False)
    anchors = find_pure_anchors(sim_oracle, pool, k)
    path = "pure"

    if anchors is None:
        if not sim_oracle.supports_repeated_triplets:
            raise ReductionUnavailableError(
                "no pure anchor set among the candidates and the oracle has no repeated-index triplets"
            )
        path = "tensor"
        for _ in range(params.anchor_attempts):
            picked = [int(i) for i in rng.choice(n, size=k, replace=False)]
            try:
                tensor = build_moment_tensor(sim_oracle, picked)
                factors = jennrich_decompose(tensor, k, rng, params.max_retries, params.eigen_gap)
            except (RankError, DecompositionError):
                continue
            basis = np.column_stack(factors)
            cond = float(np.linalg.cond(basis))
            if np.isfinite(cond) and cond <= settings.condition_limit:
                anchors = AnchorSet(indices=picked, basis=basis, is_pure=False, condition_number=cond)
                break
        if anchors is None:
            raise ReductionUnavailableError("neither pure anchors nor a tensor decomposition were found")

    logger.log_reduction_bootstrap(
        path,
        anchors.indices,
        sim_oracle.ledger.pair_count - start_pairs,
        sim_oracle.ledger.triplet_count - start_triplets,
    )
    return SimilarityMembershipOracle(sim_oracle, anchors, path)
