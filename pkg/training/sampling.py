"""Gaussian augmentation and non-neighbor negative sampling."""

from __future__ import annotations

import logging

import numpy as np
import numpy.typing as npt

from errors import NoNegativesAvailableError
from models import (
    DenseMatrix,
    EmbeddingMatrix,
    Graph,
    NegativeDistribution,
)
from settings import DEGREE_NEGATIVE_EXPONENT
from utils import as_generator

logger = logging.getLogger(__name__)


def gaussian_noise(shape: tuple[int, ...], sigma: float, seed: int | np.random.Generator) -> DenseMatrix:
    """Draw sigma-scaled i.i.d. standard Gaussian noise."""
    if sigma < 0:
        raise ValueError(f"Augmentation error: sigma={sigma} reason=negative")
    return sigma * as_generator(seed).standard_normal(shape)


def augment(z: EmbeddingMatrix, sigma: float, seed: int | np.random.Generator) -> EmbeddingMatrix:
    """Return Z⁺ = Z + sigma·G."""
    return z + gaussian_noise(z.shape, sigma, seed)


class NegativeSampler:
    """Draws, for each node, m ids with replacement from the nodes that are neither itself nor a neighbor.

    Nodes with few non-neighbors sample from an explicit candidate list; the rest use
    rejection sampling over all ids. The degree variant weights candidates by degree^0.75.
    """

    def __init__(
        self,
        graph: Graph,
        m: int,
        *,
        distribution: NegativeDistribution = NegativeDistribution.UNIFORM,
        seed: int | np.random.Generator = 0,
    ) -> None:
        """Bind the sampler to a graph and a random stream."""
        if m < 1:
            raise ValueError(f"Negative sampling error: m={m} reason=below_one")
        self.graph = graph
        self.m = m
        self.distribution = distribution
        self.rng = as_generator(seed)
        self._neighbor_counts = np.diff(graph.adjacency.indptr)
        self._weights = graph.degree**DEGREE_NEGATIVE_EXPONENT

    def candidates(self, node: int) -> npt.NDArray[np.intp]:
        """Return the sorted ids eligible as negatives of `node`."""
        excluded = np.append(self.graph.neighbors(node), node)
        return np.setdiff1d(np.arange(self.graph.n), excluded)

    def sample(self, node: int) -> npt.NDArray[np.intp]:
        """Return m negative ids for one node."""
        n = self.graph.n
        available = n - 1 - int(self._neighbor_counts[node])
        if available <= 0:
            raise NoNegativesAvailableError(
                f"Negative sampling error: node={node} nodes={n} reason=adjacent_to_all_nodes"
            )
        if self.distribution is NegativeDistribution.DEGREE:
            return self._sample_weighted(node)
        if 2 * available < n:
            return self.rng.choice(self.candidates(node), size=self.m, replace=True)
        return self._sample_rejection(node)

    def _sample_rejection(self, node: int) -> npt.NDArray[np.intp]:
        neighbors = self.graph.neighbors(node)
        drawn = self.rng.integers(0, self.graph.n, size=self.m)
        while True:
            invalid = (drawn == node) | np.isin(drawn, neighbors)
            if not invalid.any():
                return drawn.astype(np.intp)
            drawn[invalid] = self.rng.integers(0, self.graph.n, size=int(invalid.sum()))

    def _sample_weighted(self, node: int) -> npt.NDArray[np.intp]:
        candidates = self.candidates(node)
        weights = self._weights[candidates]
        total = weights.sum()
        if total <= 0:
            # only isolated candidates remain
            return self.rng.choice(candidates, size=self.m, replace=True)
        return self.rng.choice(candidates, size=self.m, replace=True, p=weights / total)

    def sample_all(self) -> npt.NDArray[np.intp]:
        """Return an n×m matrix of negatives, row i for node i."""
        return np.vstack([self.sample(node) for node in range(self.graph.n)])


def sample_negatives(
    node: int,
    graph: Graph,
    m: int,
    seed: int | np.random.Generator,
    *,
    distribution: NegativeDistribution = NegativeDistribution.UNIFORM,
) -> npt.NDArray[np.intp]:
    """Draw m negatives for one node from a fresh sampler."""
    return NegativeSampler(graph, m, distribution=distribution, seed=seed).sample(node)
