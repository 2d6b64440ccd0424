"""Simulated oracle answering queries about a hidden target clustering."""

from typing import Callable, Iterable, Optional, Protocol, runtime_checkable

import numpy as np

from fuzzyquery.core.structure import is_consistent_center_based
from fuzzyquery.errors import CapabilityError, ConfigError, InvalidQueryError
from fuzzyquery.schemas.clustering import Clustering
from fuzzyquery.schemas.oracle import QueryBudget, QueryLedger
from fuzzyquery.utils.helpers import PointsLike, spawn_rng

NoiseHook = Callable[[np.random.Generator, float, int], np.ndarray]


def gaussian_noise(rng: np.random.Generator, sigma: float, size: int) -> np.ndarray:
    return rng.normal(0.0, sigma, size=size)


@runtime_checkable
class MembershipOracle(Protocol):
    """What a solver needs: membership answers and a ledger to count them"""

    ledger: QueryLedger

    @property
    def n(self) -> int: ...

    @property
    def k(self) -> int: ...

    def membership_query(self, i: int, j: int) -> float: ...

    def membership_row(self, i: int, clusters: Optional[Iterable[int]] = None) -> np.ndarray: ...


class TargetOracle:
    """Hidden clustering behind membership, pairwise and triplet queries.

    Every answer is charged to `ledger` before it is computed, so a budget is
    never exceeded. With `noise_sigma > 0` membership answers carry fresh
    independent noise on every call.
    """

    def __init__(
        self,
        target: Clustering,
        noise_sigma: float = 0.0,
        seed: int = 0,
        budget: Optional[QueryBudget] = None,
        record_log: bool = False,
        supports_repeated_triplets: bool = False,
        strict: bool = False,
        X: Optional[PointsLike] = None,
        alpha: Optional[float] = None,
        noise: NoiseHook = gaussian_noise,
    ):
        if noise_sigma < 0:
            raise ConfigError(f"noise_sigma must be nonnegative, got {noise_sigma}")
        if strict:
            if X is None or alpha is None:
                raise ConfigError("strict oracle construction needs the dataset and alpha")
            report = is_consistent_center_based(X, target, alpha)
            if not report.consistent:
                raise ConfigError(
                    "target is not consistent center-based",
                    {
                        "center_violations": len(report.center_violations),
                        "monotonicity_violations": report.n_monotonicity_violations,
                    },
                )

        self.target = target
        self.noise_sigma = float(noise_sigma)
        self.supports_repeated_triplets = supports_repeated_triplets
        self.strict = strict
        self.ledger = QueryLedger(budget=budget or QueryBudget(), log=[] if record_log else None)
        self._U = target.memberships
        self._rng = spawn_rng(seed, "oracle-noise")
        self._noise = noise

    @property
    def n(self) -> int:
        return self._U.shape[0]

    @property
    def k(self) -> int:
        return self._U.shape[1]

    def _check_element(self, i: int):
        if not 0 <= i < self.n:
            raise InvalidQueryError(f"element index {i} outside [0, {self.n})")

    def _check_cluster(self, j: int):
        if not 0 <= j < self.k:
            raise InvalidQueryError(f"cluster index {j} outside [0, {self.k})")

    def membership_query(self, i: int, j: int) -> float:
        i, j = int(i), int(j)
        self._check_element(i)
        self._check_cluster(j)
        self.ledger.charge("membership")
        answer = float(self._U[i, j])
        if self.noise_sigma > 0:
            answer += float(self._noise(self._rng, self.noise_sigma, 1)[0])
        self.ledger.record({"t": "mem", "i": i, "j": j, "ans": answer})
        return answer

    def membership_query_batch(self, i: int, j: int, count: int) -> np.ndarray:
        """`count` independent answers to the same membership query"""
        i, j = int(i), int(j)
        self._check_element(i)
        self._check_cluster(j)
        self.ledger.charge("membership", count)
        answers = np.full(count, float(self._U[i, j]))
        if self.noise_sigma > 0:
            answers = answers + self._noise(self._rng, self.noise_sigma, count)
        if self.ledger.log is not None:
            for a in answers:
                self.ledger.record({"t": "mem", "i": i, "j": j, "ans": float(a)})
        return answers

    def membership_row(self, i: int, clusters: Optional[Iterable[int]] = None) -> np.ndarray:
        """Memberships of element i to each listed cluster, one query apiece"""
        clusters = range(self.k) if clusters is None else clusters
        return np.array([self.membership_query(i, j) for j in clusters])

    def pair_similarity(self, p: int, q: int) -> float:
        p, q = int(p), int(q)
        self._check_element(p)
        self._check_element(q)
        if p == q:
            raise InvalidQueryError("pairwise similarity needs two distinct elements")
        self.ledger.charge("pair")
        answer = float(self._U[p] @ self._U[q])
        self.ledger.record({"t": "pair", "p": p, "q": q, "ans": answer})
        return answer

    def triplet_similarity(self, p: int, q: int, r: int, allow_repeats: bool = False) -> float:
        p, q, r = int(p), int(q), int(r)
        for idx in (p, q, r):
            self._check_element(idx)
        if allow_repeats and not self.supports_repeated_triplets:
            raise CapabilityError(
                "this oracle only answers triplets of distinct elements; "
                "construct it with supports_repeated_triplets=True for moment tensors"
            )
        if not allow_repeats and len({p, q, r}) < 3:
            raise InvalidQueryError("triplet similarity needs three distinct elements")
        self.ledger.charge("triplet")
        answer = float(np.sum(self._U[p] * self._U[q] * self._U[r]))
        self.ledger.record({"t": "tri", "p": p, "q": q, "r": r, "ans": answer})
        return answer
