from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from fuzzyquery.schemas.types import FloatArray


class AnchorSet(BaseModel):
    """Elements whose membership rows form an invertible basis"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    indices: List[int]
    basis: FloatArray
    is_pure: bool = False
    condition_number: Optional[float] = None

    @field_validator("basis")
    @classmethod
    def check_square(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("anchor basis must be a square k x k array")
        return v

    @property
    def k(self) -> int:
        return self.basis.shape[0]


class MomentTensor(BaseModel):
    """Symmetric third moment sum_t V[:, t] (x) V[:, t] (x) V[:, t] over anchors"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    anchors: List[int]
    entries: FloatArray

    @field_validator("entries")
    @classmethod
    def check_cube(cls, v: np.ndarray) -> np.ndarray:
        if v.ndim != 3 or not v.shape[0] == v.shape[1] == v.shape[2]:
            raise ValueError("moment tensor must be a cubic a x a x a array")
        return v

    @property
    def dims(self) -> tuple:
        return self.entries.shape


class ReductionParams(BaseModel):
    candidates: int = Field(default=40, ge=1)
    anchor_attempts: int = Field(default=3, ge=1)
    max_retries: int = Field(default=5, ge=0)
    eigen_gap: float = Field(default=1e-8, gt=0)
    seed: int = Field(default=0, ge=0)
