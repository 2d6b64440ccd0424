from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from fuzzyquery.errors import BudgetExhaustedError

QUERY_KINDS = ("membership", "pair", "triplet")


class QueryBudget(BaseModel):
    """Optional cap per query type; None means unlimited"""

    membership: Optional[int] = None
    pair: Optional[int] = None
    triplet: Optional[int] = None

    @field_validator("membership", "pair", "triplet")
    @classmethod
    def check_nonnegative(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 0:
            raise ValueError("budgets must be nonnegative")
        return v


class QueryLedger(BaseModel):
    membership_count: int = 0
    pair_count: int = 0
    triplet_count: int = 0
    budget: QueryBudget = Field(default_factory=QueryBudget)
    log: Optional[List[Dict[str, Any]]] = None

    @property
    def total(self) -> int:
        return self.membership_count + self.pair_count + self.triplet_count

    def count(self, kind: str) -> int:
        return getattr(self, f"{kind}_count")

    def charge(self, kind: str, n: int = 1):
        """Count n queries of one kind, refusing any that would exceed the budget"""
        if kind not in QUERY_KINDS:
            raise ValueError(f"unknown query kind '{kind}'")
        cap = getattr(self.budget, kind)
        used = self.count(kind)
        if cap is not None and used + n > cap:
            raise BudgetExhaustedError(kind, self.counts())
        setattr(self, f"{kind}_count", used + n)

    def record(self, entry: Dict[str, Any]):
        if self.log is not None:
            self.log.append(entry)

    def counts(self) -> Dict[str, int]:
        return {
            "membership": self.membership_count,
            "pair": self.pair_count,
            "triplet": self.triplet_count,
            "total": self.total,
        }

    def snapshot(self) -> "QueryLedger":
        """Counts and budget at this moment, without the query log"""
        return QueryLedger(
            membership_count=self.membership_count,
            pair_count=self.pair_count,
            triplet_count=self.triplet_count,
            budget=self.budget.model_copy(),
        )
