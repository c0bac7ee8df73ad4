from __future__ import annotations

import itertools

import numpy as np
import pytest

from clustering.kmeans import (
    fit_kmeans,
    kmeans,
    spectral_reference_partition,
)
from clustering.metrics import (
    metric_report,
    modularity,
    pair_counts,
    pair_metrics,
)
from errors import (
    ClusteringError,
    MetricError,
)
from graphs.core import build_graph
from models import (
    Graph,
    PairCounts,
    Partition,
)
from providers.sbm import generate_sbm


def two_triangles() -> Graph:
    return build_graph(6, [0, 1, 2, 3, 4, 5], [1, 2, 0, 4, 5, 3])


def partition(labels: list[int]) -> Partition:
    return Partition.from_labels(labels)


def brute_force_counts(predicted: Partition, truth: Partition) -> tuple[int, int, int, int]:
    tp = fp = fn = tn = 0
    for i, j in itertools.combinations(range(predicted.n), 2):
        same_predicted = predicted.same_community(i, j)
        same_truth = truth.same_community(i, j)
        tp += same_predicted and same_truth
        fp += same_predicted and not same_truth
        fn += same_truth and not same_predicted
        tn += not same_predicted and not same_truth
    return tp, fp, fn, tn


def double_loop_modularity(graph: Graph, assignment: np.ndarray) -> float:
    adjacency = graph.adjacency.toarray()
    degree = adjacency.sum(axis=1)
    total = adjacency.sum()
    score = 0.0
    for i in range(graph.n):
        for j in range(graph.n):
            if assignment[i] == assignment[j]:
                score += adjacency[i, j] - degree[i] * degree[j] / total
    return score / total


def test_kmeans_with_one_cluster_per_point_has_zero_objective() -> None:
    points = np.random.default_rng(1).normal(size=(8, 3))

    result = fit_kmeans(points, 8, seed=1)

    assert result.objective == 0.0
    assert result.partition.k_effective == 8


def test_kmeans_groups_nearby_pairs() -> None:
    points = np.array([[0.0, 0.0], [0.1, 0.0], [10.0, 10.0], [10.1, 10.0]])

    assignment = kmeans(points, 2, seed=5).assignment

    assert assignment[0] == assignment[1]
    assert assignment[2] == assignment[3]
    assert assignment[0] != assignment[2]


def test_kmeans_is_deterministic_for_a_fixed_seed() -> None:
    points = np.random.default_rng(2).normal(size=(60, 4))

    first = fit_kmeans(points, 5, seed=9)
    second = fit_kmeans(points, 5, seed=9)

    assert np.array_equal(first.partition.assignment, second.partition.assignment)
    assert first.objective_history == second.objective_history


@pytest.mark.parametrize("seed", range(5))
def test_kmeans_objective_never_increases(seed: int) -> None:
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=5.0, size=(4, 2))
    points = np.vstack([center + rng.normal(size=(30, 2)) for center in centers])

    history = fit_kmeans(points, 4, seed=seed).objective_history

    for before, after in zip(history, history[1:], strict=False):
        assert after <= before + 1e-9


def test_kmeans_rejects_k_above_the_point_count() -> None:
    with pytest.raises(ClusteringError, match="k_out_of_range"):
        fit_kmeans(np.zeros((3, 2)), 4, seed=1)


def test_kmeans_rejects_non_finite_points() -> None:
    points = np.ones((4, 2))
    points[1, 0] = np.nan

    with pytest.raises(ClusteringError, match="non_finite_points"):
        fit_kmeans(points, 2, seed=1)


@pytest.mark.parametrize("seed", range(5))
def test_kmeans_restarts_never_raise_the_objective(seed: int) -> None:
    rng = np.random.default_rng(seed)
    centers = rng.normal(scale=3.0, size=(6, 3))
    points = np.vstack([center + rng.normal(size=(20, 3)) for center in centers])

    single = fit_kmeans(points, 6, seed=seed, restarts=1)
    restarted = fit_kmeans(points, 6, seed=seed, restarts=10)

    assert restarted.objective <= single.objective


def test_kmeans_restarts_are_reproducible_from_a_generator() -> None:
    points = np.random.default_rng(3).normal(size=(50, 2))

    first = kmeans(points, 4, np.random.default_rng(11), restarts=5)
    second = kmeans(points, 4, np.random.default_rng(11), restarts=5)

    assert np.array_equal(first.assignment, second.assignment)


def test_kmeans_rejects_zero_restarts() -> None:
    with pytest.raises(ClusteringError, match="restarts=0"):
        fit_kmeans(np.zeros((3, 2)), 2, seed=1, restarts=0)


def test_kmeans_repairs_empty_clusters_on_identical_points() -> None:
    result = fit_kmeans(np.ones((5, 2)), 2, seed=1)

    assert result.partition.k_effective == 2
    assert result.objective == 0.0


def test_spectral_reference_recovers_disjoint_cliques() -> None:
    graph = generate_sbm(2, 6, 1.0, 0.0, seed=1)
    truth = Partition(np.repeat(np.arange(2), 6).astype(np.int64), 2)

    predicted = spectral_reference_partition(graph, 2, seed=1)

    assert pair_metrics(pair_counts(predicted, truth)).jaccard == pytest.approx(1.0)


def test_single_community_has_zero_modularity() -> None:
    graph = generate_sbm(3, 5, 0.7, 0.2, seed=4)

    assert modularity(graph, Partition(np.zeros(15, dtype=np.int64), 1)) == pytest.approx(0.0, abs=1e-15)


def test_modularity_of_two_triangles() -> None:
    graph = two_triangles()

    assert modularity(graph, partition([0, 0, 0, 1, 1, 1])) == pytest.approx(0.5)
    assert modularity(graph, partition([0, 1, 2, 3, 4, 5])) == pytest.approx(-1.0 / 6.0)


@pytest.mark.parametrize("seed", range(5))
def test_modularity_matches_the_double_loop_definition(seed: int) -> None:
    graph = generate_sbm(3, 8, 0.5, 0.1, seed)
    assignment = np.random.default_rng(seed).integers(0, 4, size=graph.n)

    expected = double_loop_modularity(graph, assignment)

    assert modularity(graph, Partition.from_labels(assignment)) == pytest.approx(expected, abs=1e-12)


def test_modularity_errors() -> None:
    with pytest.raises(MetricError, match="length_mismatch"):
        modularity(two_triangles(), partition([0, 1]))
    with pytest.raises(MetricError, match="edgeless_graph"):
        modularity(build_graph(3, [], []), partition([0, 1, 2]))


@pytest.mark.parametrize(
    ("predicted", "truth", "expected"),
    [
        ([0, 0, 0, 1, 1, 1], [0, 0, 0, 1, 1, 1], PairCounts(tp=6, fp=0, fn=0, tn=9)),
        ([0, 0, 0, 0, 0, 0], [0, 0, 0, 1, 1, 1], PairCounts(tp=6, fp=9, fn=0, tn=0)),
        ([0, 0], [0, 1], PairCounts(tp=0, fp=1, fn=0, tn=0)),
    ],
)
def test_pair_counts_examples(predicted: list[int], truth: list[int], expected: PairCounts) -> None:
    assert pair_counts(partition(predicted), partition(truth)) == expected


def test_pair_counts_match_brute_force() -> None:
    rng = np.random.default_rng(12)

    for _ in range(50):
        predicted = Partition.from_labels(rng.integers(0, 4, size=30))
        truth = Partition.from_labels(rng.integers(0, 3, size=30))

        counts = pair_counts(predicted, truth)

        assert (counts.tp, counts.fp, counts.fn, counts.tn) == brute_force_counts(predicted, truth)
        assert counts.total == 30 * 29 // 2


def test_pair_counts_reject_length_mismatch() -> None:
    with pytest.raises(MetricError, match="length_mismatch"):
        pair_counts(partition([0, 1]), partition([0, 1, 1]))


def test_pair_metrics_of_identical_partitions_are_one() -> None:
    counts = pair_counts(partition([0, 0, 1, 1, 2]), partition([5, 5, 7, 7, 9]))

    metrics = pair_metrics(counts)

    assert (metrics.jaccard, metrics.fm, metrics.f1, metrics.kulczynski) == (1.0, 1.0, 1.0, 1.0)


@pytest.mark.parametrize(
    ("counts", "expected"),
    [
        (PairCounts(tp=6, fp=9, fn=0, tn=0), (0.4, 0.6325, 0.5714, 0.7)),
        (PairCounts(tp=1, fp=1, fn=1, tn=0), (1.0 / 3.0, 0.5, 0.5, 0.5)),
    ],
)
def test_pair_metrics_examples(counts: PairCounts, expected: tuple[float, float, float, float]) -> None:
    metrics = pair_metrics(counts)

    assert (metrics.jaccard, metrics.fm, metrics.f1, metrics.kulczynski) == pytest.approx(expected, abs=1e-4)


def test_pair_metrics_are_ordered() -> None:
    rng = np.random.default_rng(21)

    for _ in range(1000):
        predicted = Partition.from_labels(rng.integers(0, 3, size=20))
        truth = Partition.from_labels(rng.integers(0, 3, size=20))

        metrics = pair_metrics(pair_counts(predicted, truth))

        assert metrics.kulczynski >= metrics.fm - 1e-12
        assert metrics.fm >= metrics.f1 - 1e-12
        assert metrics.f1 >= metrics.jaccard - 1e-12


def test_pair_metrics_reject_zero_denominators() -> None:
    with pytest.raises(MetricError, match="metric=jaccard"):
        pair_metrics(PairCounts(tp=0, fp=0, fn=0, tn=3))
    with pytest.raises(MetricError, match="metric=fm"):
        pair_metrics(PairCounts(tp=0, fp=2, fn=0, tn=1))


def test_all_in_one_partition_on_balanced_classes() -> None:
    truth = Partition(np.repeat(np.arange(2), 1000).astype(np.int64), 2)
    predicted = Partition(np.zeros(2000, dtype=np.int64), 1)

    metrics = pair_metrics(pair_counts(predicted, truth))

    assert (metrics.jaccard, metrics.fm, metrics.f1, metrics.kulczynski) == pytest.approx(
        (0.5, 0.7071, 0.6667, 0.75), abs=1e-3
    )


def test_metric_report_flags_degenerate_partitions() -> None:
    graph = two_triangles()

    report = metric_report(graph, Partition(np.zeros(6, dtype=np.int64), 2), partition([0, 0, 0, 1, 1, 1]))

    assert report["k"] == 2
    assert report["k_effective"] == 1
    assert report["degenerate"] is True
    assert report["modularity"] == pytest.approx(0.0, abs=1e-15)
    assert report["jaccard"] == pytest.approx(0.4)


def test_metric_report_skips_what_cannot_be_computed() -> None:
    report = metric_report(build_graph(3, [], []), partition([0, 1, 1]), None)

    assert report == {"k": 2, "k_effective": 2, "degenerate": False}


def test_spectral_reference_solves_the_four_block_model() -> None:
    graph = generate_sbm(4, 50, 0.3, 0.02, seed=1)
    truth = Partition.from_labels(graph.labels)

    predicted = spectral_reference_partition(graph, 4, seed=1)

    assert pair_metrics(pair_counts(predicted, truth)).f1 > 0.95
