from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from fuzzyquery.schemas.oracle import QueryLedger
from fuzzyquery.schemas.solver import SolverConfig


class SyntheticSpec(BaseModel):
    """Gaussian blobs around well separated centers"""

    k: int = Field(default=4, ge=1)
    d: int = Field(default=10, ge=1)
    sizes: List[int] = Field(default_factory=lambda: [500, 500, 500, 500])
    center_separation: float = 1000.0
    point_std: float = 20.0
    seed: int = 0
    # "first" separates only the first center from the rest
    separation_mode: Literal["all-pairs", "first"] = "all-pairs"

    @field_validator("sizes")
    @classmethod
    def check_sizes(cls, v: List[int]) -> List[int]:
        if any(s < 1 for s in v):
            raise ValueError("every cluster size must be >= 1")
        return v

    @field_validator("center_separation")
    @classmethod
    def check_separation(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("center separation must be > 0")
        return v

    @field_validator("point_std")
    @classmethod
    def check_std(cls, v: float) -> float:
        if v < 0:
            raise ValueError("point_std must be nonnegative")
        return v

    @model_validator(mode="after")
    def check_size_count(self):
        if len(self.sizes) != self.k:
            raise ValueError(f"{len(self.sizes)} sizes given for k={self.k}")
        return self

    def with_zeta(self, zeta: float) -> "SyntheticSpec":
        """First cluster keeps its size, every other one becomes zeta times larger"""
        base = self.sizes[0]
        sizes = [base] + [max(1, int(round(base * zeta)))] * (self.k - 1)
        return self.model_copy(update={"sizes": sizes})

    def with_k(self, k: int) -> "SyntheticSpec":
        """k clusters: the first keeps its size, the others take the current second size"""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        first = self.sizes[0]
        rest = self.sizes[1] if len(self.sizes) > 1 else first
        return self.model_copy(update={"k": k, "sizes": [first] + [rest] * (k - 1)})


class EvalReport(BaseModel):
    center_error: float
    membership_error: float
    argmax_accuracy: Optional[float] = None
    unmatched_accuracy: Optional[float] = None
    matching: List[int]
    queries: Optional[QueryLedger] = None


class DatasetSource(BaseModel):
    kind: Literal["synthetic", "csv"] = "synthetic"
    synthetic: Optional[SyntheticSpec] = None
    path: Optional[str] = None
    label_column: Optional[str] = "label"

    @model_validator(mode="after")
    def check_source(self):
        if self.kind == "synthetic" and self.synthetic is None:
            self.synthetic = SyntheticSpec()
        if self.kind == "csv" and not self.path:
            raise ValueError("csv datasets need a path")
        return self


class TargetSpec(BaseModel):
    mode: Literal["lloyd", "hard-labels"] = "lloyd"
    k: Optional[int] = Field(default=None, ge=1)
    alpha: float = 2.0
    max_iter: int = Field(default=300, ge=1)
    tol: float = 1e-9


class BudgetRule(BaseModel):
    """Derives sample sizes from a per-run query budget nu"""

    two_phase_ratio: float = 1.0
    sequential_ratio: float = 0.4
    two_cluster_ratio: float = 1.0
    r_from_m: bool = False

    def m_for(self, solver: str, nu: float) -> int:
        ratio = {
            "two-phase": self.two_phase_ratio,
            "sequential": self.sequential_ratio,
            "two-cluster": self.two_cluster_ratio,
        }.get(solver, 1.0)
        return max(1, int(round(nu * ratio)))


class SweepConfig(BaseModel):
    name: str = "sweep"
    seed: int = Field(ge=0)
    trials: int = Field(default=1, ge=1)
    dataset: DatasetSource = Field(default_factory=DatasetSource)
    target: TargetSpec = Field(default_factory=TargetSpec)
    solvers: List[Literal["two-phase", "sequential", "two-cluster", "lloyd"]] = Field(
        default_factory=lambda: ["two-phase"]
    )
    solver: SolverConfig = Field(default_factory=SolverConfig)
    grid: Dict[str, List[Any]] = Field(default_factory=dict)
    budget: BudgetRule = Field(default_factory=BudgetRule)
    noise_sigma: float = Field(default=0.0, ge=0)
    kappa: Optional[float] = Field(default=None, gt=0)

    @field_validator("solvers")
    @classmethod
    def check_solvers(cls, v: List[str]) -> List[str]:
        if not v:
            raise ValueError("at least one solver is required")
        return v

    @field_validator("grid")
    @classmethod
    def check_grid(cls, v: Dict[str, List[Any]]) -> Dict[str, List[Any]]:
        for key, values in v.items():
            if not values:
                raise ValueError(f"grid axis '{key}' is empty")
        return v


class SweepRecord(BaseModel):
    grid_index: int
    trial: int
    solver: str
    seed: int = Field(ge=0)
    params: Dict[str, Any]
    solver_config: Optional[Dict[str, Any]] = None
    status: Literal["ok", "failed"]
    error_type: Optional[str] = None
    error: Optional[str] = None
    report: Optional[EvalReport] = None
    per_stage_counts: Dict[str, int] = Field(default_factory=dict)
    total_queries: int = 0
    duration: float = 0.0
