"""Newman modularity and pair-counting agreement between partitions."""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp

from errors import MetricError
from models import (
    Graph,
    PairCounts,
    PairMetrics,
    Partition,
)


def modularity(graph: Graph, partition: Partition) -> float:
    """Return Q = (1/2|E|) Σ_ij (A_ij − k_i k_j / 2|E|)·[c_i = c_j] over all ordered pairs, diagonal included."""
    if partition.n != graph.n:
        raise MetricError(f"Modularity error: nodes={graph.n} partition={partition.n} reason=length_mismatch")
    total = graph.total_weight
    if total <= 0:
        raise MetricError("Modularity error: reason=edgeless_graph")
    assignment = partition.assignment
    edges = sp.coo_array(graph.adjacency)
    within = float(edges.data[assignment[edges.row] == assignment[edges.col]].sum())
    community_degree = np.bincount(assignment, weights=graph.degree, minlength=partition.k)
    return (within - float(np.sum(community_degree**2)) / total) / total


def _pairs(count: int) -> int:
    return count * (count - 1) // 2


def pair_counts(predicted: Partition, truth: Partition) -> PairCounts:
    """Count agreements over all unordered node pairs from the contingency table."""
    if predicted.n != truth.n:
        raise MetricError(f"Pair count error: predicted={predicted.n} truth={truth.n} reason=length_mismatch")
    table = np.zeros((predicted.k, truth.k), dtype=np.int64)
    np.add.at(table, (predicted.assignment, truth.assignment), 1)
    tp = sum(_pairs(int(value)) for value in table.ravel() if value > 1)
    predicted_pairs = sum(_pairs(int(value)) for value in table.sum(axis=1))
    truth_pairs = sum(_pairs(int(value)) for value in table.sum(axis=0))
    fp = predicted_pairs - tp
    fn = truth_pairs - tp
    return PairCounts(tp=tp, fp=fp, fn=fn, tn=_pairs(predicted.n) - tp - fp - fn)


def pair_metrics(counts: PairCounts) -> PairMetrics:
    """Return Jaccard, Fowlkes-Mallows, F1 and Kulczynski indices."""
    tp, fp, fn = counts.tp, counts.fp, counts.fn
    if tp + fp + fn == 0:
        raise MetricError(f"Pair metric error: metric=jaccard tp={tp} fp={fp} fn={fn} reason=zero_denominator")
    if tp + fp == 0 or tp + fn == 0:
        raise MetricError(f"Pair metric error: metric=fm tp={tp} fp={fp} fn={fn} reason=zero_denominator")
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return PairMetrics(
        jaccard=tp / (tp + fn + fp),
        fm=tp / math.sqrt((tp + fn) * (tp + fp)),
        f1=2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0,
        kulczynski=(precision + recall) / 2,
    )


def metric_report(graph: Graph, predicted: Partition, truth: Partition | None) -> dict[str, float | int | bool]:
    """Return the metrics JSON object of one run; pair metrics only when ground truth exists."""
    report: dict[str, float | int | bool] = {
        "k": predicted.k,
        "k_effective": predicted.k_effective,
        "degenerate": predicted.k_effective == 1,
    }
    if graph.total_weight > 0:
        report["modularity"] = modularity(graph, predicted)
    if truth is not None:
        metrics = pair_metrics(pair_counts(predicted, truth))
        report.update(
            jaccard=metrics.jaccard,
            fm=metrics.fm,
            f1=metrics.f1,
            kulczynski=metrics.kulczynski,
        )
    return report
