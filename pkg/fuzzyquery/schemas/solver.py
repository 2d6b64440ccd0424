from typing import Any, Dict, List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from fuzzyquery.schemas.clustering import Clustering
from fuzzyquery.schemas.oracle import QueryLedger
from fuzzyquery.schemas.types import FloatArray, IntArray


class SolverConfig(BaseModel):
    """Inputs shared by the query solvers"""

    alpha: float = 2.0
    m: int = Field(default=1000, ge=1)
    r: int = Field(default=100, ge=1)
    eta: float = 0.1
    eta1: float = 0.1
    eta2: float = 0.1
    delta: float = 0.1
    seed: int = 0
    clamp: bool = False

    @field_validator("alpha")
    @classmethod
    def check_alpha(cls, v: float) -> float:
        # the membership exponent 2/(alpha - 1) is singular at alpha = 1
        if not v > 1:
            raise ValueError("alpha must be > 1")
        return v

    @field_validator("eta", "eta1", "eta2", "delta")
    @classmethod
    def check_unit_interval(cls, v: float) -> float:
        if not 0 < v < 1:
            raise ValueError("must lie in (0, 1)")
        return v

    @field_validator("seed")
    @classmethod
    def check_seed(cls, v: int) -> int:
        if not 0 <= v < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        return v

    @model_validator(mode="after")
    def check_grid_order(self):
        if self.eta2 > self.eta1:
            raise ValueError("eta2 must not exceed eta1")
        return self


class GridEstimate(BaseModel):
    """Memberships of one cluster on the eta-grid, with the thresholds that produced them"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    values: FloatArray
    grid: float
    thresholds: List[int]
    permutation: IntArray
    queries: int


class SolverResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    solver: str
    estimate: Clustering
    ledger_snapshot: QueryLedger
    per_stage_counts: Dict[str, int]
    cluster_order: List[int] = Field(default_factory=list)
    seed: int
    config: SolverConfig
    diagnostics: Dict[str, Any] = Field(default_factory=dict)

    @property
    def total_queries(self) -> int:
        return sum(self.per_stage_counts.values())

    def row_sums(self) -> np.ndarray:
        return self.estimate.memberships.sum(axis=1)
