from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from fuzzyquery.config import settings
from fuzzyquery.schemas.types import FloatArray


class Dataset(BaseModel):
    """n points in d-dimensional Euclidean space inside B(0, radius)"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    points: FloatArray
    radius: Optional[float] = None

    @field_validator("points")
    @classmethod
    def check_points(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("points must be a non-empty n x d array")
        if not np.all(np.isfinite(v)):
            raise ValueError("points must be finite")
        return v

    @model_validator(mode="after")
    def check_radius(self):
        max_norm = float(np.max(np.linalg.norm(self.points, axis=1)))
        if self.radius is None:
            self.radius = max_norm
        elif self.radius < 0:
            raise ValueError("radius must be nonnegative")
        elif max_norm > self.radius * (1 + 1e-12) + 1e-12:
            raise ValueError(f"point norm {max_norm} exceeds radius {self.radius}")
        return self

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


class MembershipMatrix(BaseModel):
    """Soft assignment matrix with rows on the probability simplex"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    entries: FloatArray

    @field_validator("entries")
    @classmethod
    def check_simplex_rows(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("memberships must be a non-empty n x k array")
        tol = settings.tolerance
        if np.any(v < -tol) or np.any(v > 1 + tol):
            raise ValueError("membership entries must lie in [0, 1]")
        row_sums = v.sum(axis=1)
        worst = float(np.max(np.abs(row_sums - 1.0)))
        if worst > tol:
            raise ValueError(f"membership rows must sum to 1 (worst deviation {worst:.3e})")
        return v

    def is_valid_solution(self) -> bool:
        """Every column carries mass strictly between 0 and n"""
        col = self.entries.sum(axis=0)
        n = self.entries.shape[0]
        return bool(np.all(col > 0) and np.all(col < n))


class Clustering(BaseModel):
    """The pair (centers, memberships)"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    centers: FloatArray
    memberships: FloatArray
    consistent: bool = False

    @field_validator("centers")
    @classmethod
    def check_centers(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("centers must be a non-empty k x d array")
        return v

    @field_validator("memberships")
    @classmethod
    def check_memberships(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 2:
            raise ValueError("memberships must be an n x k array")
        if not np.all(np.isfinite(v)):
            raise ValueError("memberships must be finite")
        return v

    @model_validator(mode="after")
    def check_shapes(self):
        if self.centers.shape[0] != self.memberships.shape[1]:
            raise ValueError(
                f"{self.centers.shape[0]} centers but {self.memberships.shape[1]} membership columns"
            )
        return self

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def n(self) -> int:
        return self.memberships.shape[0]
