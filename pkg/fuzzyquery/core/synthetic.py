"""Seeded synthetic instances."""

from typing import List, Optional, Tuple

import numpy as np

from fuzzyquery.core.fuzzy import update_centers
from fuzzyquery.core.structure import is_consistent_center_based
from fuzzyquery.errors import ConfigError
from fuzzyquery.schemas.clustering import Clustering, Dataset
from fuzzyquery.schemas.harness import SyntheticSpec
from fuzzyquery.utils.helpers import spawn_rng


def _separated_centers(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    k, d, sep = spec.k, spec.d, spec.center_separation
    if spec.separation_mode == "first":
        # only the first center keeps a per-coordinate gap from the others
        centers = rng.uniform(-sep / 4, sep / 4, size=(k, d))
        sign = rng.choice([-1.0, 1.0], size=d)
        centers[0] = sign * (sep / 4 + sep * (1.0 + rng.uniform(0.0, 0.5, size=d)))
        return centers
    # every coordinate holds k values spaced at least sep apart, in random order
    steps = sep * (1.0 + rng.uniform(0.0, 0.5, size=(k, d)))
    steps[0] = 0.0
    ladder = np.cumsum(steps, axis=0)
    ladder -= ladder.mean(axis=0)
    return np.column_stack([rng.permutation(ladder[:, c]) for c in range(d)])


def generate_synthetic(spec: SyntheticSpec) -> Tuple[Dataset, np.ndarray]:
    """Gaussian blobs of the requested sizes around separated centers.

    Returns the dataset and the generating label of every point; points are
    grouped by label in cluster order.
    """
    rng = spawn_rng(spec.seed, "synthetic")
    centers = _separated_centers(spec, rng)
    blocks = [center + spec.point_std * rng.standard_normal((size, spec.d)) for center, size in zip(centers, spec.sizes)]
    labels = np.repeat(np.arange(spec.k), spec.sizes)
    return Dataset(points=np.vstack(blocks)), labels


def _ball(rng: np.random.Generator, center: np.ndarray, radius: float, size: int) -> np.ndarray:
    d = center.shape[0]
    direction = rng.standard_normal((size, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    scale = radius * rng.uniform(0.0, 1.0, size=(size, 1)) ** (1.0 / d)
    return center + direction * scale


def generate_bridged_instance(
    k: int,
    d: int = 2,
    core_size: int = 60,
    bridge_size: int = 20,
    alpha: float = 2.0,
    separation: float = 10.0,
    core_radius: float = 1.0,
    seed: int = 0,
    core_sizes: Optional[List[int]] = None,
    max_attempts: int = 20,
) -> Tuple[Dataset, Clustering]:
    """A consistent center-based target built from pure cores and mixed bridges.

    Clusters are paired; each pair is joined by a segment carrying mixed
    elements whose membership shifts linearly from one end to the other, and
    pairs sit far apart. An odd cluster out is a lone pure ball. Centers are
    the weighted means of the memberships, and the instance is only returned
    once it passes the full consistency check.
    """
    if k < 1 or d < 1:
        raise ConfigError("need k >= 1 and d >= 1")
    sizes = core_sizes or [core_size] * k
    if len(sizes) != k or min(sizes) < 1:
        raise ConfigError("core_sizes needs k positive entries")

    axis = np.zeros(d)
    axis[0] = 1.0
    across = np.zeros(d)
    across[1 if d > 1 else 0] = 1.0
    spacing = 10.0 * separation
    margin, edge = 0.35, 0.05

    for attempt in range(max_attempts):
        rng = spawn_rng(seed, "bridged", attempt)
        nominal = np.empty((k, d))
        for j in range(k):
            group, side = divmod(j, 2)
            mid = group * spacing * axis
            nominal[j] = mid if (k % 2 and j == k - 1) else mid + (side - 0.5) * separation * across

        points, rows = [], []
        for j in range(k):
            points.append(_ball(rng, nominal[j], core_radius, sizes[j]))
            pure = np.zeros((sizes[j], k))
            pure[:, j] = 1.0
            rows.append(pure)
        for j in range(0, k - 1, 2):
            p = j + 1
            t = rng.uniform(margin, 1.0 - margin, size=bridge_size)
            points.append(nominal[j] + t[:, None] * (nominal[p] - nominal[j]))
            share = edge + (1.0 - 2 * edge) * (t - margin) / (1.0 - 2 * margin)
            mixed = np.zeros((bridge_size, k))
            mixed[:, j] = 1.0 - share
            mixed[:, p] = share
            rows.append(mixed)

        X = np.vstack(points)
        U = np.vstack(rows)
        target = Clustering(centers=update_centers(X, U, alpha), memberships=U)
        if is_consistent_center_based(X, target, alpha).consistent:
            target.consistent = True
            return Dataset(points=X), target

    raise ConfigError(f"no consistent bridged instance after {max_attempts} attempts")
