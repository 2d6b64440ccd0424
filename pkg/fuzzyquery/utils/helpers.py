import math
import zlib
from typing import Union

import numpy as np

from fuzzyquery.errors import ShapeError
from fuzzyquery.schemas.clustering import Dataset

PointsLike = Union[Dataset, np.ndarray]


def as_points(X: PointsLike) -> np.ndarray:
    """Return the n x d point array of a Dataset or array"""
    if isinstance(X, Dataset):
        return X.points
    points = np.asarray(X, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if points.ndim != 2:
        raise ShapeError(f"expected an n x d array, got shape {points.shape}")
    return points


def as_centers(centers, d: int) -> np.ndarray:
    mu = np.asarray(centers, dtype=float)
    if mu.ndim == 1:
        mu = mu.reshape(1, -1) if d > 1 else mu.reshape(-1, 1)
    if mu.ndim != 2 or mu.shape[1] != d:
        raise ShapeError(f"centers of shape {mu.shape} do not match dimension {d}")
    return mu


def ceil_log2(n: int) -> int:
    """ceil(log2 n), with 0 for n <= 1"""
    if n <= 1:
        return 0
    return (n - 1).bit_length()


def grid_top(eta: float) -> int:
    """Number of nonzero grid levels, ceil(1/eta), robust to float round-off"""
    return int(math.ceil(1.0 / eta - 1e-9))


def grid_levels(eta: float) -> np.ndarray:
    """0, eta, 2 eta, ..., 1 with the top level capped at 1"""
    # rounding keeps s*eta equal to the decimal literal (3 * 0.1 -> 0.3)
    return np.minimum(np.round(np.arange(grid_top(eta) + 1) * eta, 12), 1.0)


def stage_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def spawn_rng(seed: int, *keys: Union[int, str]) -> np.random.Generator:
    """Independent generator for (seed, *keys); string keys are hashed stably"""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for key in keys:
        entropy.append(stage_key(key) if isinstance(key, str) else int(key))
    return np.random.default_rng(np.random.SeedSequence(entropy))


def squared_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """D2[i, j] = ||x_i - mu_j||^2"""
    out = np.empty((points.shape[0], centers.shape[0]))
    for j, mu in enumerate(centers):
        diff = points - mu
        out[:, j] = np.einsum("ij,ij->i", diff, diff)
    return out
