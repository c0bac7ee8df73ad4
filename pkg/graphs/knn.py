"""Attribute graphs from tabular features by exact K-nearest-neighbor search."""

from __future__ import annotations

import logging

import numpy as np
import numpy.typing as npt
from scipy.spatial.distance import cdist

from errors import GraphError
from graphs.core import build_graph
from models import (
    DenseMatrix,
    Graph,
)

logger = logging.getLogger(__name__)


def standardize(features: DenseMatrix) -> DenseMatrix:
    """Center every column and scale it to unit sample standard deviation.

    Zero-variance columns become all zeros.
    """
    if features.shape[0] < 2:
        raise GraphError(f"Standardize error: rows={features.shape[0]} reason=need_two_rows")
    centered = features - features.mean(axis=0)
    std = features.std(axis=0, ddof=1)
    safe_std = np.where(std > 0, std, 1.0)
    return np.where(std > 0, centered / safe_std, 0.0)


def knn_indices(features: DenseMatrix, k: int) -> npt.NDArray[np.intp]:
    """Return, per row, the ids of its k nearest other rows; ties go to the lower id."""
    n = features.shape[0]
    if k < 1:
        raise GraphError(f"KNN error: k={k} reason=k_below_one")
    if k >= n:
        raise GraphError(f"KNN error: k={k} nodes={n} reason=k_not_below_node_count")
    distances = cdist(features, features, metric="sqeuclidean")
    np.fill_diagonal(distances, np.inf)
    # stable sort keeps index order among equal distances
    return np.argsort(distances, axis=1, kind="stable")[:, :k]


def build_knn_graph(
    features: DenseMatrix,
    k: int,
    *,
    labels: npt.NDArray[np.int64] | None = None,
) -> Graph:
    """Connect every row to its k nearest neighbors, symmetrized by union, unit weights."""
    neighbors = knn_indices(features, k)
    n = features.shape[0]
    sources = np.repeat(np.arange(n), k)
    targets = neighbors.ravel()
    # union symmetrization: an edge selected from both endpoints is kept once
    keys = np.unique(np.minimum(sources, targets) * n + np.maximum(sources, targets))
    graph = build_graph(n, keys // n, keys % n, attributes=features, labels=labels)
    logger.info("KNN graph built: nodes=%d k=%d edges=%d", n, k, graph.edge_count)
    return graph
