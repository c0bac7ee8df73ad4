"""Shared domain models for SDGE graph embedding and community discovery."""

from __future__ import annotations

import math
from dataclasses import (
    dataclass,
    field,
)
from enum import StrEnum
from functools import cached_property
from pathlib import Path

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from errors import GraphError
from settings import (
    ADAM_LEARNING_RATE,
    DEFAULT_BETA,
    DEFAULT_CHEB_ORDER,
    DEFAULT_EMBEDDING_DIMS,
    DEFAULT_EPOCHS,
    DEFAULT_GAMMA,
    DEFAULT_KNN_K,
    DEFAULT_MU,
    DEFAULT_NEGATIVES,
    DEFAULT_NOISE_SIGMA,
    DEFAULT_ORDER,
    DEFAULT_SBM_BLOCK_SIZE,
    DEFAULT_SBM_BLOCKS,
    DEFAULT_SBM_P_IN,
    DEFAULT_SBM_P_OUT,
    DEFAULT_TABULAR_FEATURES,
    DEFAULT_TABULAR_SAMPLES,
    DEFAULT_TAU,
    DEFAULT_THETA,
    DEFAULT_TOLERANCE,
    DYRELU_INTERCEPT_RANGE,
    DYRELU_PIECES,
    DYRELU_REDUCTION,
    DYRELU_SLOPE_RANGE,
    GCN_LAYER_WIDTHS,
    KMEANS_RESTARTS,
    MLP_HIDDEN_WIDTH,
)

type DenseMatrix = npt.NDArray[np.float64]
type EmbeddingMatrix = npt.NDArray[np.float64]
type SparseMatrix = sp.csr_array


class AggregationMode(StrEnum):
    """How the r GCN outputs are fused."""

    SUM = "sum"
    CONCAT = "cat"


class SpectralSchedule(StrEnum):
    """When spectral propagation enhances the embedding."""

    OFF = "off"
    POST = "post"
    EACH_EPOCH = "each-epoch"


class NegativeDistribution(StrEnum):
    """Distribution negatives are drawn from among non-neighbors."""

    UNIFORM = "uniform"
    DEGREE = "degree"


class Activation(StrEnum):
    """Hidden-layer activation of the GCN stacks."""

    DYRELU = "dyrelu"
    RELU = "relu"


class TabularKind(StrEnum):
    """Synthetic tabular generators."""

    HYPERPLANE = "hyperplane"
    WAVEFORM = "waveform"


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph with optional node attributes and ground-truth labels.

    The adjacency is a canonical CSR matrix: symmetric, nonnegative, finite and with
    an empty diagonal. Edge weights live in the matrix values.
    """

    adjacency: SparseMatrix
    attributes: DenseMatrix | None = None
    labels: npt.NDArray[np.int64] | None = None

    def __post_init__(self) -> None:
        """Validate the graph invariants once, at construction."""
        adjacency = self.adjacency
        if not isinstance(adjacency, sp.csr_array):
            raise TypeError(
                f"Graph error: field=adjacency expected_type=csr_array actual_type={type(adjacency).__name__}"
            )
        rows, cols = adjacency.shape
        if rows != cols:
            raise GraphError(f"Graph error: field=adjacency shape={rows}x{cols} reason=not_square")
        if not adjacency.has_canonical_format:
            raise GraphError("Graph error: field=adjacency reason=non_canonical_csr")
        if not np.all(np.isfinite(adjacency.data)) or np.any(adjacency.data < 0):
            raise GraphError("Graph error: field=adjacency reason=negative_or_non_finite")
        if np.any(adjacency.diagonal() != 0):
            raise GraphError("Graph error: field=adjacency reason=self_loop")
        if (adjacency != adjacency.T).nnz:
            raise GraphError("Graph error: field=adjacency reason=asymmetric")
        if self.attributes is not None:
            if self.attributes.ndim != 2 or self.attributes.shape[0] != rows:
                raise GraphError(
                    f"Graph error: field=attributes shape={self.attributes.shape} nodes={rows} reason=row_mismatch"
                )
            if not np.all(np.isfinite(self.attributes)):
                raise GraphError("Graph error: field=attributes reason=non_finite")
        if self.labels is not None and len(self.labels) != rows:
            raise GraphError(f"Graph error: field=labels length={len(self.labels)} nodes={rows} reason=length_mismatch")

    @property
    def n(self) -> int:
        """Return the node count."""
        return int(self.adjacency.shape[0])

    @cached_property
    def degree(self) -> npt.NDArray[np.float64]:
        """Return weighted degrees, the row sums of the adjacency."""
        return np.asarray(self.adjacency.sum(axis=1), dtype=np.float64).ravel()

    @property
    def edge_count(self) -> int:
        """Return the number of undirected edges."""
        return int(sp.triu(self.adjacency, k=1).nnz)

    @property
    def edge_weights(self) -> npt.NDArray[np.float64]:
        """Return per-edge weights in upper-triangle row-major order."""
        return np.asarray(sp.triu(self.adjacency, k=1, format="csr").data, dtype=np.float64)

    @property
    def total_weight(self) -> float:
        """Return 2|E| in the weighted sense, the sum of every adjacency entry."""
        return float(self.adjacency.sum())

    def neighbors(self, node: int) -> npt.NDArray[np.int32]:
        """Return the sorted neighbor ids of a node."""
        start, end = self.adjacency.indptr[node], self.adjacency.indptr[node + 1]
        return self.adjacency.indices[start:end]

    def isolated_nodes(self) -> npt.NDArray[np.intp]:
        """Return the ids of nodes without any incident edge."""
        return np.flatnonzero(self.degree == 0)


@dataclass(frozen=True, eq=False)
class TabularDataset:
    """Feature matrix with optional class labels, the input of KNN graph construction."""

    features: DenseMatrix
    labels: npt.NDArray[np.int64] | None = None

    def __post_init__(self) -> None:
        """Validate finiteness and size."""
        if self.features.ndim != 2 or self.features.shape[0] < 2:
            raise ValueError(f"Tabular dataset error: shape={self.features.shape} reason=need_two_rows")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("Tabular dataset error: field=features reason=non_finite")
        if self.labels is not None and len(self.labels) != self.features.shape[0]:
            raise ValueError("Tabular dataset error: field=labels reason=length_mismatch")


@dataclass(frozen=True, eq=False)
class Partition:
    """Community assignment per node, ids in `[0, k)`."""

    assignment: npt.NDArray[np.int64]
    k: int

    def __post_init__(self) -> None:
        """Validate the assignment range."""
        if self.k < 1:
            raise ValueError(f"Partition error: k={self.k} reason=k_below_one")
        if self.assignment.ndim != 1:
            raise ValueError("Partition error: field=assignment reason=not_one_dimensional")
        if self.assignment.size and (self.assignment.min() < 0 or self.assignment.max() >= self.k):
            raise ValueError(f"Partition error: k={self.k} reason=assignment_out_of_range")

    @classmethod
    def from_labels(cls, labels: npt.ArrayLike) -> Partition:
        """Relabel arbitrary integer labels to consecutive community ids."""
        values = np.asarray(labels)
        if values.size == 0:
            raise ValueError("Partition error: field=labels reason=empty")
        _, assignment = np.unique(values, return_inverse=True)
        assignment = assignment.astype(np.int64).ravel()
        return cls(assignment=assignment, k=int(assignment.max()) + 1)

    @property
    def n(self) -> int:
        """Return the number of assigned nodes."""
        return int(self.assignment.size)

    @property
    def k_effective(self) -> int:
        """Return the number of non-empty communities."""
        return int(np.unique(self.assignment).size)

    def same_community(self, i: int, j: int) -> bool:
        """Return the same-community indicator of two nodes."""
        return bool(self.assignment[i] == self.assignment[j])


@dataclass(frozen=True)
class PairCounts:
    """Confusion counts over unordered node pairs."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        """Reject negative counts."""
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError(f"Pair count error: counts={self} reason=negative")

    @property
    def total(self) -> int:
        """Return the number of pairs, n(n-1)/2."""
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class PairMetrics:
    """Pair-counting agreement indices between a prediction and the ground truth."""

    jaccard: float
    fm: float
    f1: float
    kulczynski: float


@dataclass(frozen=True)
class DyReluConfig:
    """Spatially shared Dynamic ReLU: one coefficient set per feature from a global mean context."""

    pieces: int = DYRELU_PIECES
    reduction: int = DYRELU_REDUCTION
    slope_range: float = DYRELU_SLOPE_RANGE
    intercept_range: float = DYRELU_INTERCEPT_RANGE

    def __post_init__(self) -> None:
        """Validate the hyper-net shape."""
        if self.pieces < 1 or self.reduction < 1:
            raise ValueError(f"Dynamic ReLU config error: pieces={self.pieces} reduction={self.reduction}")


@dataclass(frozen=True)
class FusionConfig:
    """Aggregation of the r GCN outputs; `weights` holds the alpha vector."""

    mode: AggregationMode = AggregationMode.CONCAT
    include_attributes: bool = False
    weights: tuple[float, ...] = (1.0,)

    def __post_init__(self) -> None:
        """Check alpha is a probability vector."""
        if not self.weights or any(weight < 0 for weight in self.weights):
            raise ValueError(f"Fusion config error: weights={self.weights} reason=negative_or_empty")
        if not math.isclose(math.fsum(self.weights), 1.0, abs_tol=1e-9):
            raise ValueError(f"Fusion config error: weights={self.weights} reason=not_normalized")


@dataclass(frozen=True)
class LossWeights:
    """Loss weights beta, gamma and contrastive temperature tau."""

    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA
    tau: float = DEFAULT_TAU

    def __post_init__(self) -> None:
        """Validate the documented parameter ranges."""
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError(f"Loss weight error: beta={self.beta} reason=outside_0_1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"Loss weight error: gamma={self.gamma} reason=outside_0_1")
        if not 0.0 < self.tau <= 100.0:
            raise ValueError(f"Loss weight error: tau={self.tau} reason=outside_0_100")


@dataclass(frozen=True)
class ModulatorConfig:
    """Band-pass spectral modulator g(λ) = exp(-θ/2 · ((λ - μ)² - 1)) and its Chebyshev order."""

    mu: float = DEFAULT_MU
    theta: float = DEFAULT_THETA
    order: int = DEFAULT_CHEB_ORDER

    def __post_init__(self) -> None:
        """Validate the truncation order and bandwidth."""
        if self.order < 1:
            raise ValueError(f"Modulator config error: order={self.order} reason=below_one")
        if self.theta <= 0:
            raise ValueError(f"Modulator config error: theta={self.theta} reason=not_positive")


@dataclass(frozen=True)
class TrainConfig:
    """Everything the training loop needs besides the loss weights."""

    epochs: int = DEFAULT_EPOCHS
    order: int = DEFAULT_ORDER
    dims: int = DEFAULT_EMBEDDING_DIMS
    k: int = 2
    learning_rate: float = ADAM_LEARNING_RATE
    seed: int = 1
    aggregation: AggregationMode = AggregationMode.CONCAT
    spectral: SpectralSchedule = SpectralSchedule.POST
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    tolerance: float = DEFAULT_TOLERANCE
    negatives: int = DEFAULT_NEGATIVES
    negative_distribution: NegativeDistribution = NegativeDistribution.UNIFORM
    activation: Activation = Activation.DYRELU
    layer_widths: tuple[int, ...] = GCN_LAYER_WIDTHS
    hidden_width: int = MLP_HIDDEN_WIDTH
    kmeans_restarts: int = KMEANS_RESTARTS
    end_to_end: bool = False
    contrastive: bool = True
    reweight_fusion: bool = True
    include_attributes: bool = True
    binarize_powers: bool = False
    dense_fallback: bool = False
    self_loop_isolated: bool = False
    deterministic: bool = False
    modulator: ModulatorConfig = field(default_factory=ModulatorConfig)
    dyrelu: DyReluConfig = field(default_factory=DyReluConfig)

    def __post_init__(self) -> None:
        """Validate counts and sizes."""
        if self.epochs < 0:
            raise ValueError(f"Train config error: epochs={self.epochs} reason=negative")
        if self.order < 1:
            raise ValueError(f"Train config error: order={self.order} reason=below_one")
        if self.k < 1 or self.dims < 1 or self.hidden_width < 1:
            raise ValueError(f"Train config error: k={self.k} dims={self.dims} reason=below_one")
        if not self.layer_widths or min(self.layer_widths) < 1:
            raise ValueError(f"Train config error: layer_widths={self.layer_widths} reason=invalid")
        if self.negatives < 1:
            raise ValueError(f"Train config error: negatives={self.negatives} reason=below_one")
        if self.kmeans_restarts < 1:
            raise ValueError(f"Train config error: kmeans_restarts={self.kmeans_restarts} reason=below_one")
        if self.noise_sigma < 0:
            raise ValueError(f"Train config error: noise_sigma={self.noise_sigma} reason=negative")
        if self.learning_rate <= 0:
            raise ValueError(f"Train config error: learning_rate={self.learning_rate} reason=not_positive")

    @property
    def output_width(self) -> int:
        """Return the MLP output width: k in end-to-end mode, d otherwise."""
        return self.k if self.end_to_end else self.dims


@dataclass(frozen=True)
class EpochRecord:
    """Loss components of one training epoch."""

    epoch: int
    contrastive: float
    reconstruction: float
    regularization: float
    total: float


@dataclass(frozen=True)
class DatasetSpec:
    """Where a run's graph comes from: files/URLs, or a named generator with parameters."""

    generator: str = "sbm"
    edges: str | None = None
    attributes: str | None = None
    labels: str | None = None
    attributes_header: bool = False
    blocks: int = DEFAULT_SBM_BLOCKS
    block_size: int = DEFAULT_SBM_BLOCK_SIZE
    p_in: float = DEFAULT_SBM_P_IN
    p_out: float = DEFAULT_SBM_P_OUT
    samples: int = DEFAULT_TABULAR_SAMPLES
    features: int = DEFAULT_TABULAR_FEATURES
    knn_k: int = DEFAULT_KNN_K


@dataclass(frozen=True)
class ExperimentConfig:
    """One named experiment: a dataset, a model configuration and the seeds to run it with."""

    name: str
    dataset: DatasetSpec
    train: TrainConfig
    weights: LossWeights
    seeds: tuple[int, ...] = (1,)
    k: int | None = None
    output_dir: Path = Path("outputs")
    cache_dir: Path = Path("data")
    save_checkpoint: bool = False
    workers: int = 1
