from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from fuzzyquery.core.targets import encode_labels
from fuzzyquery.errors import ShapeError
from fuzzyquery.schemas.clustering import Clustering
from fuzzyquery.schemas.harness import EvalReport
from fuzzyquery.schemas.oracle import QueryLedger


def match_centers(target_centers: np.ndarray, estimate_centers: np.ndarray) -> Tuple[np.ndarray, float]:
    """Permutation sigma minimizing sum_j ||mu_j - mu_hat_sigma(j)||, and that sum"""
    cost = cdist(target_centers, estimate_centers)
    rows, cols = linear_sum_assignment(cost)
    sigma = np.empty(len(rows), dtype=int)
    sigma[rows] = cols
    return sigma, float(cost[rows, cols].sum())


def evaluate(
    target: Clustering,
    estimate: Clustering,
    labels=None,
    ledger: Optional[QueryLedger] = None,
) -> EvalReport:
    """Center and membership errors after matching estimated clusters to target ones"""
    if target.k != estimate.k:
        raise ShapeError(f"target has {target.k} clusters, estimate {estimate.k}")
    if target.n != estimate.n:
        raise ShapeError(f"target has {target.n} membership rows, estimate {estimate.n}")
    if target.centers.shape[1] != estimate.centers.shape[1]:
        raise ShapeError("target and estimate centers differ in dimension")

    sigma, _ = match_centers(target.centers, estimate.centers)
    center_error = float(np.max(np.linalg.norm(target.centers - estimate.centers[sigma], axis=1)))
    membership_error = float(np.max(np.abs(target.memberships - estimate.memberships[:, sigma])))

    argmax_accuracy = unmatched_accuracy = None
    if labels is not None:
        codes, _ = encode_labels(labels)
        if codes.shape[0] != estimate.n:
            raise ShapeError(f"{codes.shape[0]} labels for {estimate.n} elements")
        predicted = np.argmax(estimate.memberships, axis=1)
        inverse = np.argsort(sigma)
        argmax_accuracy = float(np.mean(inverse[predicted] == codes))
        unmatched_accuracy = float(np.mean(predicted == codes))

    return EvalReport(
        center_error=center_error,
        membership_error=membership_error,
        argmax_accuracy=argmax_accuracy,
        unmatched_accuracy=unmatched_accuracy,
        matching=sigma.tolist(),
        queries=ledger.snapshot() if ledger is not None else None,
    )
