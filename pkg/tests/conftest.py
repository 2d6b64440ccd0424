import os

import hypothesis
import numpy as np
import pytest

from fuzzyquery.core.fuzzy import update_centers
from fuzzyquery.core.logging_service import get_logging_service
from fuzzyquery.schemas.clustering import Clustering, Dataset

np.seterr(all="warn")

# bind the log handler to the session-wide stderr, not to one test's capsys stream
get_logging_service()

hypothesis.settings.register_profile("dev", max_examples=25, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=200, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_blobs():
    """Two tight blobs on the line, five points each, with hard labels"""
    left = np.array([[-10.0], [-10.5], [-9.5], [-10.2], [-9.8]])
    right = -left
    points = np.vstack([left, right])
    labels = np.array([0] * 5 + [1] * 5)
    return Dataset(points=points), labels


@pytest.fixture
def hard_two_blobs(two_blobs):
    dataset, labels = two_blobs
    U = np.zeros((dataset.n, 2))
    U[np.arange(dataset.n), labels] = 1.0
    return dataset, Clustering(centers=update_centers(dataset.points, U, 2.0), memberships=U)


@pytest.fixture
def random_target():
    """Factory: points in a box and Dirichlet memberships with matching weighted centers"""

    def make(rng: np.random.Generator, n: int, k: int, d: int = 3, alpha: float = 2.0):
        points = rng.uniform(-5.0, 5.0, size=(n, d))
        U = rng.dirichlet(np.ones(k), size=n)
        return points, Clustering(centers=update_centers(points, U, alpha), memberships=U)

    return make


def _export(loader, path) -> str:
    bunch = loader(as_frame=True)
    frame = bunch.frame.rename(columns={"target": "label"})
    frame.to_csv(path, index=False)
    return str(path)


@pytest.fixture(scope="session")
def iris_csv(tmp_path_factory):
    from sklearn.datasets import load_iris

    return _export(load_iris, tmp_path_factory.mktemp("data") / "iris.csv")


@pytest.fixture(scope="session")
def wine_csv(tmp_path_factory):
    from sklearn.datasets import load_wine

    return _export(load_wine, tmp_path_factory.mktemp("data") / "wine.csv")


@pytest.fixture(scope="session")
def breast_cancer_csv(tmp_path_factory):
    from sklearn.datasets import load_breast_cancer

    return _export(load_breast_cancer, tmp_path_factory.mktemp("data") / "breast_cancer.csv")
