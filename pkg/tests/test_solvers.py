import numpy as np
import pytest

from fuzzyquery.core.evaluation import evaluate
from fuzzyquery.core.oracle import TargetOracle
from fuzzyquery.core.solvers import (
    estimate_center_uniform,
    grid_query_bound,
    membership2,
    renormalize,
    sample_bins,
    sequential_solve,
    solve,
    theorem_budget,
    two_cluster_query_bound,
    two_cluster_solve,
    two_phase_solve,
)
from fuzzyquery.core.search import estimate_memberships_grid
from fuzzyquery.core.structure import gamma_of
from fuzzyquery.core.synthetic import generate_bridged_instance, generate_synthetic
from fuzzyquery.core.targets import build_target
from fuzzyquery.errors import ConfigError, DegenerateSampleError, InvalidQueryError
from fuzzyquery.schemas.clustering import Clustering
from fuzzyquery.schemas.harness import SyntheticSpec
from fuzzyquery.schemas.solver import SolverConfig
from fuzzyquery.utils.helpers import ceil_log2


@pytest.fixture(scope="module")
def separated():
    spec = SyntheticSpec(k=3, d=4, sizes=[120, 80, 100], center_separation=1000.0, point_std=20.0, seed=9)
    dataset, labels = generate_synthetic(spec)
    target = build_target(dataset.points, 3, 2.0, mode="hard-labels", labels=labels)
    return dataset, labels, target


def single_cluster(n: int = 25):
    points = np.linspace(-3.0, 3.0, n).reshape(-1, 1)
    return points, Clustering(centers=[[0.0]], memberships=np.ones((n, 1)))


def split_line(n: int, small: int, seed: int = 0):
    """Hard two-cluster instance on the line: n - small points near 0, small near 10"""
    rng = np.random.default_rng(seed)
    points = np.concatenate([rng.uniform(0.0, 1.0, n - small), rng.uniform(10.0, 11.0, small)]).reshape(-1, 1)
    labels = np.array([0] * (n - small) + [1] * small)
    return points, build_target(points, 2, 2.0, mode="hard-labels", labels=labels)


@pytest.mark.parametrize("solver", ["two-phase", "sequential"])
def test_single_cluster_estimate_is_all_ones(solver):
    points, target = single_cluster()
    result = solve(solver, points, TargetOracle(target), 1, SolverConfig(m=10))
    np.testing.assert_array_equal(result.estimate.memberships, np.ones((25, 1)))
    assert result.cluster_order == [0]


@pytest.mark.parametrize("solver", ["two-phase", "sequential"])
def test_separated_blobs_recovered_exactly(separated, solver):
    dataset, labels, target = separated
    oracle = TargetOracle(target)
    result = solve(solver, dataset.points, oracle, 3, SolverConfig(m=200, r=50, seed=4))
    report = evaluate(target, result.estimate, labels, oracle.ledger)
    assert report.argmax_accuracy == 1.0
    assert report.membership_error == 0.0
    assert report.center_error < 20.0
    np.testing.assert_allclose(result.row_sums(), 1.0, atol=1e-9)
    assert sorted(result.cluster_order) == [0, 1, 2]


def test_two_phase_stage_accounting(separated):
    dataset, _, target = separated
    oracle = TargetOracle(target)
    cfg = SolverConfig(m=150, eta=0.05, seed=1)
    result = two_phase_solve(dataset.points, oracle, 3, cfg)
    assert set(result.per_stage_counts) == {"sample", "grid"}
    assert result.per_stage_counts["sample"] == 3 * 150
    assert result.per_stage_counts["grid"] <= 3 * grid_query_bound(dataset.n, 0.05)
    assert result.total_queries == oracle.ledger.total == result.ledger_snapshot.total


def test_sequential_stage_accounting(separated):
    dataset, _, target = separated
    oracle = TargetOracle(target)
    cfg = SolverConfig(m=100, r=30, eta1=0.1, eta2=0.05, seed=2)
    result = sequential_solve(dataset.points, oracle, 3, cfg)
    counts = result.per_stage_counts
    assert counts["sample"] == 3 * 100
    for ell in (1, 2):
        assert counts[f"grid_{ell}"] <= grid_query_bound(dataset.n, 0.1)
        assert counts[f"bins_{ell}"] % (3 - ell) == 0
        assert counts[f"bins_{ell}"] > 0
    assert counts["grid_final"] <= 3 * grid_query_bound(dataset.n, 0.05)
    assert result.total_queries == oracle.ledger.total


def test_solvers_are_deterministic(separated):
    dataset, _, target = separated
    cfg = SolverConfig(m=60, r=20, seed=13)
    a = sequential_solve(dataset.points, TargetOracle(target), 3, cfg)
    b = sequential_solve(dataset.points, TargetOracle(target), 3, cfg)
    np.testing.assert_array_equal(a.estimate.centers, b.estimate.centers)
    assert a.per_stage_counts == b.per_stage_counts


def test_rows_sum_to_one_on_fuzzy_target(random_target, rng):
    points, target = random_target(rng, 60, 3)
    for solver in ("two-phase", "sequential"):
        result = solve(solver, points, TargetOracle(target), 3, SolverConfig(m=40, r=10, eta=0.2, eta1=0.2, eta2=0.2))
        np.testing.assert_allclose(result.row_sums(), 1.0, atol=1e-9)


def test_single_sample_misses_a_cluster(separated):
    dataset, _, target = separated
    with pytest.raises(DegenerateSampleError):
        two_phase_solve(dataset.points, TargetOracle(target), 3, SolverConfig(m=1))


def test_oracle_must_match_dataset(separated):
    dataset, _, target = separated
    with pytest.raises(ConfigError):
        two_phase_solve(dataset.points[:10], TargetOracle(target), 3, SolverConfig())
    with pytest.raises(ConfigError):
        two_phase_solve(dataset.points, TargetOracle(target), 2, SolverConfig())


def test_solve_dispatch_errors(separated):
    dataset, _, target = separated
    with pytest.raises(ConfigError):
        solve("two-cluster", dataset.points, TargetOracle(target), 3, SolverConfig())
    with pytest.raises(ConfigError):
        solve("k-means", dataset.points, TargetOracle(target), 3, SolverConfig())


def test_renormalize_spreads_deficit():
    np.testing.assert_allclose(renormalize(np.array([[0.3, 0.3], [1.0, 0.0]])), [[0.5, 0.5], [1.0, 0.0]])


def test_renormalize_clamp():
    raw = np.array([[0.0, 1.0, 0.3]])
    np.testing.assert_allclose(renormalize(raw), [[-0.1, 0.9, 0.2]])
    clamped = renormalize(raw, clamp=True)
    np.testing.assert_allclose(clamped, [[0.0, 0.9 / 1.1, 0.2 / 1.1]])



@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_renormalized_grid_estimates_stay_within_eta(k):
    rng = np.random.default_rng(100 + k)
    for trial in range(10):
        dataset, target = generate_bridged_instance(k, d=2, core_size=25, bridge_size=15, seed=trial)
        gamma = gamma_of(dataset.points, target.centers)
        eta = float(rng.choice([0.05, 0.1, 0.25]))
        oracle = TargetOracle(target)
        columns = []
        for j in range(k):
            u = rng.normal(size=2)
            center_hat = target.centers[j] + 0.5 * gamma * u / np.linalg.norm(u)
            columns.append(estimate_memberships_grid(dataset.points, oracle, center_hat, j, eta).values)
        U_hat = renormalize(np.column_stack(columns))
        np.testing.assert_allclose(U_hat.sum(axis=1), 1.0, atol=1e-9)
        assert np.max(np.abs(U_hat - target.memberships)) <= eta + 1e-12


def wide_gamma_instance(threshold: float = 0.2):
    """Smallest bridged pair on the line whose target centers keep a wide distance-order margin"""
    for seed in range(300):
        dataset, target = generate_bridged_instance(2, d=1, core_size=2, bridge_size=1, seed=seed)
        gamma = gamma_of(dataset.points, target.centers)
        if gamma >= threshold:
            return dataset, target, gamma
    raise AssertionError("no bridged instance with a wide margin")


def test_two_phase_within_gamma_keeps_memberships_within_eta():
    dataset, target, gamma = wide_gamma_instance()
    oracle = TargetOracle(target)
    result = two_phase_solve(dataset.points, oracle, 2, SolverConfig(m=20000, eta=0.1, seed=6))
    report = evaluate(target, result.estimate)
    assert report.center_error <= gamma
    assert report.membership_error <= 0.1 + 1e-12
    assert report.membership_error > 0.0

def test_sample_bins_draw_sizes():
    bins = np.array([0] * 10 + [3] * 2 + [7] * 5)
    idx, weights = sample_bins(bins, 4, np.random.default_rng(0))
    assert idx.size == 4 + 2 + 4
    assert set(weights.tolist()) == {10 / 4, 1.0, 5 / 4}
    for i, w in zip(idx, weights):
        assert w == {0: 10 / 4, 3: 1.0, 7: 5 / 4}[int(bins[i])]


def test_sample_bins_weights_are_unbiased():
    rng = np.random.default_rng(31)
    bins = rng.integers(0, 5, size=50)
    bins[:2] = 9
    f = rng.uniform(0.0, 1.0, size=50)
    estimates = []
    for _ in range(10_000):
        idx, weights = sample_bins(bins, 3, rng)
        estimates.append(np.sum(weights * f[idx]))
    assert np.mean(estimates) == pytest.approx(f.sum(), rel=0.01)


def _line_oracle(second: np.ndarray):
    U = np.column_stack([1.0 - second, second])
    points = np.arange(second.size, dtype=float).reshape(-1, 1)
    return points, TargetOracle(Clustering(centers=[[0.0], [float(second.size)]], memberships=U))


def test_membership2_equal_memberships_form_one_bin():
    points, oracle = _line_oracle(np.full(32, 0.5))
    result = membership2(points, oracle, [-1.0], 0, 1)
    assert result.special == [31]
    assert result.bins == [list(range(31))]
    assert result.near == []
    np.testing.assert_array_equal(result.estimates, np.full(32, 0.5))
    assert result.queries <= 2 + ceil_log2(33)


def test_membership2_geometric_levels_need_no_specials():
    positions = np.arange(1, 65)
    second = 2.0 ** (-((64 - positions) // 8))
    points, oracle = _line_oracle(second)
    result = membership2(points, oracle, [-1.0], 0, 1)
    assert result.special == [63]
    assert len(result.bins) == 7
    assert result.near == []
    assert result.bin_levels == [2.0 ** -s for s in range(1, 8)]
    for members in result.bins:
        values = second[members]
        assert values.max() <= 2 * values.min()
    assert np.all(np.asarray(result.estimates) <= second)


def test_membership2_bins_stay_within_factor_two(rng):
    n = 400
    second = np.sort(rng.beta(0.3, 2.0, size=n))
    points, oracle = _line_oracle(second)
    result = membership2(points, oracle, [-1.0], 0, 1)
    for members in result.bins:
        values = second[members]
        assert values.max() <= 2 * values.min() + 1e-12
    for i in result.special:
        assert result.estimates[i] == pytest.approx(second[i])
    L = ceil_log2(n)
    assert len(result.bins) <= 3 * L
    assert len(result.special) <= 3 * L * L


@pytest.mark.parametrize("fraction", [0.3, 0.03, 0.003])
def test_two_cluster_accounting_ignores_balance(fraction):
    n = 1000
    points, target = split_line(n, max(1, round(fraction * n)), seed=int(fraction * 1000))
    oracle = TargetOracle(target)
    cfg = SolverConfig(m=50, r=20, eta=0.1, seed=8)
    result = two_cluster_solve(points, oracle, cfg)

    L = ceil_log2(n)
    assert oracle.ledger.total <= two_cluster_query_bound(n, 50, 20, 0.1)
    assert oracle.ledger.total == sum(result.per_stage_counts.values())
    assert set(result.per_stage_counts) == {"sample", "membership2", "second_center", "grid"}
    assert result.per_stage_counts["sample"] == 2 * 50
    assert result.diagnostics["n_bins"] <= 1 + 3 * L
    assert result.diagnostics["n_special"] <= 3 * L * L
    np.testing.assert_allclose(result.row_sums(), 1.0, atol=1e-9)
    assert sorted(result.cluster_order) == [0, 1]


def test_two_cluster_recovers_small_cluster():
    points, target = split_line(1000, 3, seed=5)
    oracle = TargetOracle(target)
    result = two_cluster_solve(points, oracle, SolverConfig(m=50, r=20, seed=3))
    report = evaluate(target, result.estimate)
    assert report.membership_error == 0.0
    assert report.center_error < 1.0


def test_two_cluster_needs_two_elements():
    points = np.array([[0.0]])
    target = Clustering(centers=[[0.0], [1.0]], memberships=[[1.0, 0.0]])
    with pytest.raises(InvalidQueryError):
        two_cluster_solve(points, TargetOracle(target), SolverConfig())


def test_theorem_budget_shapes():
    two_phase = theorem_budget("two-phase", n=1000, k=3, radius=1.0, eps=1.0, delta=0.1, c=1.0)
    assert two_phase.r is None
    assert two_phase.queries == 3 * two_phase.m + 3 * grid_query_bound(1000, 0.1)
    larger = theorem_budget("two-phase", n=1000, k=3, radius=1.0, eps=1.0, delta=0.1, c=2.0)
    assert larger.m >= two_phase.m

    two_cluster = theorem_budget("two-cluster", n=1000, k=2, radius=1.0, eps=0.5, delta=0.1, c=1.0)
    assert two_cluster.queries == two_cluster_query_bound(1000, two_cluster.m, two_cluster.r, 0.1)

    sequential = theorem_budget("sequential", n=1000, k=3, radius=1.0, eps=1.0, delta=0.1, c=1.0, beta=0.5)
    assert sequential.r is not None and sequential.queries > 3 * sequential.m


@pytest.mark.parametrize("c, delta", [(0.0, 0.1), (1.0, 1.5)])
def test_theorem_budget_rejects_bad_inputs(c, delta):
    with pytest.raises(ConfigError):
        theorem_budget("two-phase", n=10, k=2, radius=1.0, eps=1.0, delta=delta, c=c)


def test_uniform_center_estimate_costs_m_queries(separated):
    dataset, _, target = separated
    oracle = TargetOracle(target)
    center = estimate_center_uniform(dataset.points, oracle, 1, 300, 2.0, np.random.default_rng(3))
    assert oracle.ledger.membership_count == 300
    assert np.linalg.norm(center - target.centers[1]) < 20.0


def test_uniform_center_estimate_on_one_cluster():
    points, target = single_cluster()
    rng = np.random.default_rng(8)
    center = estimate_center_uniform(points, TargetOracle(target), 0, 50, 2.0, rng)
    sample = np.random.default_rng(8).integers(25, size=50)
    np.testing.assert_allclose(center, points[sample].mean(axis=0))


def test_uniform_center_estimate_needs_samples(separated):
    dataset, _, target = separated
    with pytest.raises(ConfigError):
        estimate_center_uniform(dataset.points, TargetOracle(target), 0, 0, 2.0, np.random.default_rng(0))
