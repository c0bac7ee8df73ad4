"""Synthetic tabular datasets turned into graphs by K-nearest-neighbor search."""

from __future__ import annotations

import logging

import numpy as np
import numpy.typing as npt

from graphs.knn import (
    build_knn_graph,
    standardize,
)
from models import (
    Graph,
    TabularDataset,
    TabularKind,
)
from providers.base import DatasetProvider
from utils import as_generator

logger = logging.getLogger(__name__)

WAVEFORM_CLASSES = ((0, 1), (0, 2), (1, 2))


def _base_waveforms(features: int) -> npt.NDArray[np.float64]:
    # three triangular waves peaking at a third, two thirds and the middle of the window
    t = np.linspace(1.0, 21.0, features)
    return np.vstack([np.maximum(6.0 - np.abs(t - center), 0.0) for center in (7.0, 15.0, 11.0)])


def generate_tabular(
    kind: TabularKind,
    n: int,
    d: int,
    seed: int | np.random.Generator,
    *,
    coefficients: npt.ArrayLike | None = None,
    threshold: float | None = None,
) -> TabularDataset:
    """Generate labeled points.

    hyperplane: uniform points in [0, 1]^d, positive when Σ a_i x_i ≥ a_0. Random
    coefficients default to a_0 = Σ a_i / 2, which splits the cube roughly in half.
    waveform: each of 3 classes mixes two triangular base waves with a uniform weight,
    plus standard Gaussian noise.
    """
    if n < 2 or d < 1:
        raise ValueError(f"Tabular generator error: n={n} d={d} reason=too_small")
    rng = as_generator(seed)

    if kind is TabularKind.HYPERPLANE:
        features = rng.random((n, d))
        weights = rng.random(d) if coefficients is None else np.asarray(coefficients, dtype=np.float64)
        if weights.shape != (d,):
            raise ValueError(f"Tabular generator error: coefficients={weights.shape} d={d} reason=shape_mismatch")
        offset = 0.5 * float(weights.sum()) if threshold is None else threshold
        labels = (features @ weights >= offset).astype(np.int64)
    else:
        waves = _base_waveforms(d)
        labels = rng.integers(len(WAVEFORM_CLASSES), size=n).astype(np.int64)
        mix = rng.random((n, 1))
        pairs = np.asarray(WAVEFORM_CLASSES)[labels]
        features = mix * waves[pairs[:, 0]] + (1.0 - mix) * waves[pairs[:, 1]] + rng.standard_normal((n, d))

    logger.info(
        "Tabular dataset generated: kind=%s samples=%d features=%d classes=%d",
        kind,
        n,
        d,
        np.unique(labels).size,
    )
    return TabularDataset(features=features, labels=labels)


def tabular_graph(dataset: TabularDataset, knn_k: int) -> Graph:
    """Standardize the features and connect each row to its K nearest neighbors."""
    return build_knn_graph(standardize(dataset.features), knn_k, labels=dataset.labels)


class TabularProvider(DatasetProvider):
    """Generates a synthetic tabular dataset and its KNN graph."""

    def __init__(self, kind: TabularKind, samples: int, features: int, knn_k: int, seed: int) -> None:
        """Store the generator parameters."""
        self.kind = kind
        self.name = str(kind)
        self.samples = samples
        self.features = features
        self.knn_k = knn_k
        self.seed = seed

    def ensure_data(self) -> None:
        """Nothing to fetch for generated data."""

    def dataset(self) -> TabularDataset:
        """Generate the raw features and labels."""
        return generate_tabular(self.kind, self.samples, self.features, self.seed)

    def load(self) -> Graph:
        """Generate the dataset and build its graph."""
        return tabular_graph(self.dataset(), self.knn_k)
