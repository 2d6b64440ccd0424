import numpy as np
import pytest
from hypothesis import given, strategies as st

from fuzzyquery.core.structure import (
    beta_of,
    gamma_of,
    is_consistent_center_based,
    sort_by_distance,
)
from fuzzyquery.core.synthetic import generate_bridged_instance
from fuzzyquery.schemas.clustering import Clustering, MembershipMatrix


def test_beta_uniform_memberships():
    assert beta_of(np.full((12, 4), 0.25)) == pytest.approx(1.0)


@pytest.mark.parametrize("zeta", [1, 2, 5, 24])
def test_beta_of_size_design(zeta):
    sizes = [10, 10 * zeta, 10 * zeta, 10 * zeta]
    labels = np.repeat(np.arange(4), sizes)
    U = np.zeros((labels.size, 4))
    U[np.arange(labels.size), labels] = 1.0
    assert beta_of(MembershipMatrix(entries=U)) == pytest.approx(4.0 / (1.0 + 3.0 * zeta))


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_beta_matches_column_scan(seed, k):
    U = np.random.default_rng(seed).dirichlet(np.ones(k), size=30)
    smallest = min(sum(U[i, j] for i in range(30)) for j in range(k))
    beta = beta_of(U)
    assert beta == pytest.approx(k / 30 * smallest)
    assert beta <= 1.0 + 1e-12


def test_sort_puts_the_query_point_first():
    points = np.array([[5.0, 5.0], [0.0, 0.0], [9.0, 1.0]])
    assert sort_by_distance(points, points[0])[0] == 0


def test_sort_collinear_points():
    points = np.array([[3.0], [1.0], [4.0], [2.0]])
    np.testing.assert_array_equal(sort_by_distance(points, [0.0]), [1, 3, 0, 2])


def test_sort_ties_keep_index_order():
    points = np.array([[1.0], [-1.0], [2.0], [-2.0]])
    np.testing.assert_array_equal(sort_by_distance(points, [0.0]), [0, 1, 2, 3])


def test_sort_matches_naive(rng):
    points = rng.normal(size=(50, 3))
    v = rng.normal(size=3)
    naive = sorted(range(50), key=lambda i: (float(np.linalg.norm(points[i] - v)), i))
    np.testing.assert_array_equal(sort_by_distance(points, v), naive)


def test_gamma_line_example():
    assert gamma_of(np.array([[1.0], [3.0]]), [[0.0]]) == pytest.approx(2.0)


def test_gamma_single_point_is_infinite():
    assert gamma_of(np.array([[1.0, 2.0]]), [[0.0, 0.0]]) == float("inf")


def test_gamma_duplicate_points():
    assert gamma_of(np.array([[1.0], [1.0], [4.0]]), [[0.0]]) == 0.0


def _orders(points, centers):
    d2 = ((points[None, :, :] - centers[:, None, :]) ** 2).sum(axis=2)
    return np.argsort(d2, axis=1, kind="stable")


def test_gamma_is_the_largest_order_preserving_radius(rng):
    points = rng.uniform(-3.0, 3.0, size=(8, 2))
    mu = np.array([0.3, -0.2])
    gamma = gamma_of(points, [mu])
    assert gamma > 0
    base = sort_by_distance(points, mu)

    angles = rng.uniform(0.0, 2 * np.pi, size=20000)
    directions = np.column_stack([np.cos(angles), np.sin(angles)])
    inside = _orders(points, mu + 0.999 * gamma * directions)
    assert np.all(inside == base)
    outside = _orders(points, mu + 1.001 * gamma * directions)
    assert np.any(np.any(outside != base, axis=1))


def test_gamma_on_a_line_flips_just_beyond():
    points = np.array([[1.0], [3.0], [7.0]])
    gamma = gamma_of(points, [[0.0]])
    base = sort_by_distance(points, [0.0])
    assert np.array_equal(sort_by_distance(points, [0.999 * gamma]), base)
    assert not np.array_equal(sort_by_distance(points, [1.001 * gamma]), base)


def test_consistency_reports_swapped_pair():
    points = np.array([[0.0], [1.0], [2.0], [3.0]])
    P = Clustering(
        centers=[[0.0], [3.0]],
        memberships=[[1.0, 0.0], [0.6, 0.4], [0.7, 0.3], [0.0, 1.0]],
    )
    report = is_consistent_center_based(points, P, 2.0)
    assert not report.consistent
    assert not report.monotone
    assert report.n_monotonicity_violations == 2
    assert (1, 2, 0) in report.monotonicity_violations
    assert (2, 1, 1) in report.monotonicity_violations


def test_consistency_flags_wrong_centers(hard_two_blobs):
    dataset, target = hard_two_blobs
    moved = Clustering(centers=target.centers + 0.5, memberships=target.memberships)
    report = is_consistent_center_based(dataset.points, moved, 2.0)
    assert not report.centers_ok
    assert {v.cluster for v in report.center_violations} == {0, 1}


def test_hard_blobs_are_consistent(hard_two_blobs):
    dataset, target = hard_two_blobs
    assert is_consistent_center_based(dataset.points, target, 2.0)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_bridged_instances_are_consistent(k):
    dataset, target = generate_bridged_instance(k, d=3, seed=k)
    assert target.consistent
    report = is_consistent_center_based(dataset.points, target, 2.0)
    assert report.consistent
    assert report.n_monotonicity_violations == 0
