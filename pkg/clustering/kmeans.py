"""Seeded k-means++ with Lloyd iterations, and a spectral clustering reference."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg
import scipy.sparse as sp
from scipy.spatial.distance import cdist

from errors import ClusteringError
from models import (
    DenseMatrix,
    Graph,
    Partition,
)
from settings import (
    KMEANS_MAX_ITERATIONS,
    KMEANS_RESTARTS,
    KMEANS_TOLERANCE,
)
from utils import as_generator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KMeansResult:
    """Final partition, centroids and the objective after every iteration."""

    partition: Partition
    centroids: DenseMatrix
    objective_history: tuple[float, ...]
    converged: bool

    @property
    def objective(self) -> float:
        """Return the final within-cluster sum of squares."""
        return self.objective_history[-1] if self.objective_history else 0.0

    @property
    def iterations(self) -> int:
        """Return the number of Lloyd iterations run."""
        return len(self.objective_history)


def seed_plus_plus(points: DenseMatrix, k: int, rng: np.random.Generator) -> npt.NDArray[np.intp]:
    """Pick k initial centers with D² weighting; zero total weight falls back to uniform among unchosen points."""
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    closest = cdist(points, points[chosen], metric="sqeuclidean")[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            index = int(rng.choice(n, p=closest / total))
        else:
            remaining = np.setdiff1d(np.arange(n), chosen)
            index = int(rng.choice(remaining))
        chosen.append(index)
        closest = np.minimum(closest, cdist(points, points[[index]], metric="sqeuclidean")[:, 0])
    return np.asarray(chosen, dtype=np.intp)


def _repair_empty(labels: npt.NDArray[np.int64], distances: DenseMatrix, k: int) -> npt.NDArray[np.int64]:
    own = distances[np.arange(labels.size), labels].copy()
    for cluster in range(k):
        sizes = np.bincount(labels, minlength=k)
        if sizes[cluster]:
            continue
        # only points whose cluster keeps another member may move
        eligible = np.where(sizes[labels] > 1, own, -np.inf)
        point = int(np.argmax(eligible))
        labels[point] = cluster
        own[point] = 0.0
    return labels


def _lloyd(
    points: DenseMatrix,
    k: int,
    rng: np.random.Generator,
    max_iterations: int,
    tolerance: float,
) -> KMeansResult:
    n = points.shape[0]
    centroids = points[seed_plus_plus(points, k, rng)].copy()
    labels = np.zeros(n, dtype=np.int64)
    history: list[float] = []
    converged = False
    for _ in range(max_iterations):
        distances = cdist(points, centroids, metric="sqeuclidean")
        labels = _repair_empty(np.argmin(distances, axis=1).astype(np.int64), distances, k)
        updated = np.vstack([points[labels == cluster].mean(axis=0) for cluster in range(k)])
        history.append(float(np.sum((points - updated[labels]) ** 2)))
        shift = float(np.max(np.linalg.norm(updated - centroids, axis=1)))
        centroids = updated
        if shift < tolerance:
            converged = True
            break
    return KMeansResult(Partition(labels, k), centroids, tuple(history), converged)


def fit_kmeans(
    points: DenseMatrix,
    k: int,
    seed: int | np.random.Generator,
    *,
    restarts: int = KMEANS_RESTARTS,
    max_iterations: int = KMEANS_MAX_ITERATIONS,
    tolerance: float = KMEANS_TOLERANCE,
) -> KMeansResult:
    """Cluster the rows of `points` into k groups.

    Runs `restarts` seedings drawn in order from the same generator and keeps the run
    with the lowest final objective, the earliest on ties. Assignment ties go to the
    lowest centroid index; an emptied cluster claims the point farthest from its own
    centroid. Each run stops when no centroid moves more than `tolerance` or after
    `max_iterations`.
    """
    n = points.shape[0]
    if k < 1 or k > n:
        raise ClusteringError(f"K-means error: k={k} points={n} reason=k_out_of_range")
    if restarts < 1:
        raise ClusteringError(f"K-means error: restarts={restarts} reason=not_positive")
    if not np.all(np.isfinite(points)):
        raise ClusteringError("K-means error: reason=non_finite_points")

    rng = as_generator(seed)
    best = _lloyd(points, k, rng, max_iterations, tolerance)
    for _ in range(restarts - 1):
        result = _lloyd(points, k, rng, max_iterations, tolerance)
        if result.objective < best.objective:
            best = result

    logger.debug(
        "K-means result: points=%d k=%d restarts=%d iterations=%d objective=%.6g converged=%s",
        n,
        k,
        restarts,
        best.iterations,
        best.objective,
        best.converged,
    )
    return best


def kmeans(
    points: DenseMatrix,
    k: int,
    seed: int | np.random.Generator,
    *,
    restarts: int = KMEANS_RESTARTS,
) -> Partition:
    """Return the lowest-objective k-means partition of the rows of `points` over `restarts` seedings."""
    return fit_kmeans(points, k, seed, restarts=restarts).partition


def spectral_reference_partition(graph: Graph, k: int, seed: int | np.random.Generator) -> Partition:
    """Cluster the row-normalized bottom-k eigenvectors of I − D^{-1/2}AD^{-1/2}."""
    degree = graph.degree
    inv_sqrt = np.divide(1.0, np.sqrt(degree), out=np.zeros_like(degree), where=degree > 0)
    scale = sp.diags_array(inv_sqrt)
    normalized = (scale @ graph.adjacency @ scale).toarray()
    laplacian = np.eye(graph.n) - normalized
    _, vectors = scipy.linalg.eigh(laplacian, subset_by_index=[0, k - 1])
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    embedding = vectors / np.where(norms > 0, norms, 1.0)
    return kmeans(embedding, k, seed)
