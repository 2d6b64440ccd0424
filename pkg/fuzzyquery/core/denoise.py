"""Median-of-means wrapper turning a noisy membership oracle into a near-exact one."""

import math
from typing import Iterable, Optional

import numpy as np
from pydantic import BaseModel

from fuzzyquery.core.oracle import TargetOracle
from fuzzyquery.errors import ConfigError
from fuzzyquery.schemas.oracle import QueryLedger


def batch_plan(sigma: float, kappa: float, n: int) -> tuple[int, int]:
    """(B, T') = (ceil(6 log2 n), ceil(4 sigma^2 / kappa^2)), each at least 1"""
    batches = max(1, math.ceil(6.0 * math.log2(max(n, 2)) - 1e-9))
    batch_size = max(1, math.ceil(4.0 * sigma ** 2 / kappa ** 2 - 1e-9))
    return batches, batch_size


class DenoisedMembershipOracle:
    """Answers each membership query with the median of B batch means of T'
    fresh noisy answers; every call costs B * T' queries on the wrapped ledger."""

    def __init__(
        self,
        noisy: TargetOracle,
        kappa: float,
        n: Optional[int] = None,
        batches: Optional[int] = None,
        batch_size: Optional[int] = None,
    ):
        if kappa <= 0:
            raise ConfigError(f"kappa must be > 0, got {kappa}")
        if noisy.noise_sigma <= 0 and (batches is None or batch_size is None):
            raise ConfigError("denoising needs a noisy oracle (sigma > 0) or explicit batch sizes")
        planned_b, planned_t = batch_plan(noisy.noise_sigma, kappa, n or noisy.n)
        self.noisy = noisy
        self.kappa = kappa
        self.batches = batches or planned_b
        self.batch_size = batch_size or planned_t

    @property
    def ledger(self) -> QueryLedger:
        return self.noisy.ledger

    @property
    def n(self) -> int:
        return self.noisy.n

    @property
    def k(self) -> int:
        return self.noisy.k

    @property
    def cost_per_query(self) -> int:
        return self.batches * self.batch_size

    def membership_query(self, i: int, j: int) -> float:
        answers = self.noisy.membership_query_batch(i, j, self.cost_per_query)
        means = answers.reshape(self.batches, self.batch_size).mean(axis=1)
        return float(np.median(means))

    def membership_row(self, i: int, clusters: Optional[Iterable[int]] = None) -> np.ndarray:
        clusters = range(self.k) if clusters is None else clusters
        return np.array([self.membership_query(i, j) for j in clusters])


def denoised_membership_oracle(noisy: TargetOracle, kappa: float, n: Optional[int] = None) -> DenoisedMembershipOracle:
    return DenoisedMembershipOracle(noisy, kappa, n)


class NoisyGuarantee(BaseModel):
    center_error: float
    membership_error: float
    queries: float


def noisy_solver_guarantee(
    eps2: float,
    kappa: float,
    sigma: float,
    queries: int,
    n: int,
    radius: float,
    alpha: float,
    rho: float,
) -> NoisyGuarantee:
    """Accuracy and query count of an (eps1, eps2, Q)-solver run behind the
    denoiser: (2 R alpha (eps2 + kappa) / rho, eps2 + kappa, 8 Q sigma^2 log n / kappa^2),
    with rho n the smallest sum of U^alpha over a cluster."""
    if rho <= 0 or kappa <= 0:
        raise ConfigError("rho and kappa must be positive")
    return NoisyGuarantee(
        center_error=2.0 * radius * alpha * (eps2 + kappa) / rho,
        membership_error=eps2 + kappa,
        queries=8.0 * queries * sigma ** 2 * math.log(n) / kappa ** 2,
    )
