"""Hidden target clusterings for the oracle."""

from typing import List, Literal, Optional, Tuple

import numpy as np

from fuzzyquery.core.fuzzy import lloyd_fuzzy, update_centers
from fuzzyquery.core.logging_service import get_logging_service
from fuzzyquery.core.structure import beta_of, is_consistent_center_based
from fuzzyquery.errors import ConfigError, ShapeError
from fuzzyquery.schemas.clustering import Clustering
from fuzzyquery.utils.helpers import PointsLike, as_points


def encode_labels(labels) -> Tuple[np.ndarray, np.ndarray]:
    """Map arbitrary labels to 0..c-1 in sorted order; returns (codes, classes)"""
    classes, codes = np.unique(np.asarray(labels), return_inverse=True)
    return codes.astype(np.int64), classes


def build_target(
    X: PointsLike,
    k: Optional[int],
    alpha: float,
    mode: Literal["lloyd", "hard-labels"] = "lloyd",
    labels=None,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-9,
) -> Clustering:
    """Target clustering by fuzzy Lloyd or from hard labels.

    Lloyd starts from the per-label means when labels are given, otherwise
    from k random data points. The result is flagged consistent only when it
    passes the full consistency check; the outcome is logged either way.
    """
    points = as_points(X)
    n = points.shape[0]

    if mode == "hard-labels":
        if labels is None:
            raise ConfigError("hard-labels targets need labels")
        codes, classes = encode_labels(labels)
        if codes.shape[0] != n:
            raise ShapeError(f"{codes.shape[0]} labels for {n} points")
        k = k or len(classes)
        if len(classes) != k:
            raise ConfigError(f"labels have {len(classes)} classes, k={k}")
        U = np.zeros((n, k))
        U[np.arange(n), codes] = 1.0
        target = Clustering(centers=update_centers(points, U, alpha), memberships=U)
    elif mode == "lloyd":
        init = seed
        if labels is not None:
            codes, classes = encode_labels(labels)
            k = k or len(classes)
            if len(classes) == k:
                init = np.vstack([points[codes == c].mean(axis=0) for c in range(k)])
        if not k:
            raise ConfigError("lloyd targets need k")
        target = lloyd_fuzzy(points, k, alpha, init=init, max_iter=max_iter, tol=tol, seed=seed).clustering
    else:
        raise ConfigError(f"unknown target mode '{mode}'")

    report = is_consistent_center_based(points, target, alpha)
    target.consistent = report.consistent
    get_logging_service().log_target_built(mode, n, target.k, report.consistent, report.n_monotonicity_violations)
    return target


def check_sequential_preconditions(target: Clustering, eta1: float, eta2: float) -> List[str]:
    """Warnings for grid widths outside eta2 <= eta1 <= (1/k)(1 - beta/k)"""
    k = target.k
    beta = beta_of(target.memberships)
    limit = (1.0 / k) * (1.0 - beta / k)
    logger = get_logging_service()
    warnings: List[str] = []
    if eta1 > limit:
        message = f"eta1={eta1} exceeds (1/k)(1 - beta/k) = {limit:.4g}"
        warnings.append(message)
        logger.log_precondition("eta1_limit", message, {"eta1": eta1, "beta": beta, "k": k, "limit": limit})
    if eta2 > eta1:
        message = f"eta2={eta2} exceeds eta1={eta1}"
        warnings.append(message)
        logger.log_precondition("eta_order", message, {"eta1": eta1, "eta2": eta2})
    return warnings
