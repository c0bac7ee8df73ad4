"""The SDGE training loop: powers, model, self-supervised epochs, propagation and clustering."""

from __future__ import annotations

import logging
import math
from dataclasses import (
    dataclass,
    field,
)

import numpy as np
import numpy.typing as npt

from autodiff.optim import Adam
from autodiff.tape import (
    Node,
    Tape,
    backward,
)
from clustering.kmeans import kmeans
from clustering.metrics import modularity
from errors import NumericalError
from graphs.core import (
    laplacian,
    matrix_power,
    rw_laplacian,
    structural_features,
    sym_normalize,
)
from model.fusion import fusion_weights
from model.sdge import (
    SdgeModel,
    gcn_forward,
)
from models import (
    DenseMatrix,
    EmbeddingMatrix,
    EpochRecord,
    Graph,
    LossWeights,
    Partition,
    SpectralSchedule,
    TrainConfig,
)
from settings import (
    CONVERGENCE_WINDOW,
    FUSION_REWEIGHT_INTERVAL,
)
from spectral.propagation import propagate
from training.losses import (
    contrastive_loss,
    reconstruction_loss,
    regularization_loss,
    total_loss,
)
from training.sampling import (
    NegativeSampler,
    gaussian_noise,
)
from utils import (
    RngStreams,
    StageTimer,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FitResult:
    """Everything one training run produces.

    `embedding` is the MLP output Z; `enhanced` is what clustering saw, Z after spectral
    propagation when that is enabled.
    """

    embedding: EmbeddingMatrix
    enhanced: EmbeddingMatrix
    history: list[EpochRecord]
    partition: Partition
    fusion_weights: tuple[float, ...]
    converged: bool
    model: SdgeModel = field(repr=False)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def epochs_run(self) -> int:
        """Return the number of completed epochs."""
        return len(self.history)


@dataclass
class ConvergenceMonitor:
    """Stops once the relative loss change stays below `tolerance` for `window` consecutive epochs."""

    tolerance: float
    window: int = CONVERGENCE_WINDOW
    previous: float | None = None
    streak: int = 0

    def update(self, loss: float) -> bool:
        """Record one epoch loss and return whether training has converged."""
        if self.previous is not None:
            change = abs(loss - self.previous) / max(abs(self.previous), np.finfo(np.float64).tiny)
            self.streak = self.streak + 1 if change < self.tolerance else 0
        self.previous = loss
        return self.streak >= self.window


def _scalar(node: Node) -> float:
    return float(np.asarray(node.value).reshape(-1)[0])


def _modularity_weights(
    model: SdgeModel,
    graph: Graph,
    features: DenseMatrix,
    k: int,
    rng: np.random.Generator,
    restarts: int,
) -> npt.NDArray[np.float64]:
    tape = Tape()
    hidden = gcn_forward(tape, model.stacks, tape.constant(features))
    scores = [modularity(graph, kmeans(h.value, k, rng, restarts=restarts)) for h in hidden]
    weights = fusion_weights(scores)
    logger.debug(
        "Fusion weights updated: modularities=%s weights=%s",
        ",".join(f"{score:.4f}" for score in scores),
        ",".join(f"{weight:.4f}" for weight in weights),
    )
    return weights


def fit(
    graph: Graph,
    config: TrainConfig,
    weights: LossWeights,
    *,
    timer: StageTimer | None = None,
) -> FitResult:
    """Train an SDGE network on `graph` and return the embedding, loss history and partition.

    The fusion weights are refreshed from per-order modularities every few epochs and
    act as constants in the backward pass. In each-epoch spectral mode the propagated
    embedding is the positive anchor of the next epoch's contrastive term.
    """
    timer = timer or StageTimer()
    streams = RngStreams(config.seed)
    for stage in ("powers", "training", "reweight", "spectral", "clustering"):
        timer.touch(stage)

    with timer.stage("powers"):
        powers = matrix_power(
            graph.adjacency,
            config.order,
            dense_fallback=config.dense_fallback,
            binarize_powers=config.binarize_powers,
        )
        propagations = [sym_normalize(power) for power in powers]
        features = graph.attributes if graph.attributes is not None else structural_features(graph)
        attribute_gram = features @ features.T
        graph_laplacian = laplacian(graph)
        dense_adjacency = graph.adjacency.toarray()

    spectral_on = config.spectral is not SpectralSchedule.OFF and not config.end_to_end
    if spectral_on:
        # fail before training when the random walk is undefined
        rw_laplacian(graph, self_loop_isolated=config.self_loop_isolated)

    attribute_width = graph.attributes.shape[1] if graph.attributes is not None else 0
    model = SdgeModel(propagations, features.shape[1], config, attribute_width=attribute_width, rng=streams.init)
    optimizer = Adam(model.parameters(), learning_rate=config.learning_rate)
    sampler = (
        NegativeSampler(graph, config.negatives, distribution=config.negative_distribution, seed=streams.negatives)
        if config.contrastive
        else None
    )
    reweight = config.reweight_fusion and model.order > 1 and graph.total_weight > 0
    monitor = ConvergenceMonitor(config.tolerance)
    history: list[EpochRecord] = []
    anchor: EmbeddingMatrix | None = None
    converged = False

    for epoch in range(config.epochs):
        if reweight and epoch % FUSION_REWEIGHT_INTERVAL == 0:
            with timer.stage("reweight"):
                model.set_fusion_weights(
                    _modularity_weights(model, graph, features, config.k, streams.kmeans, config.kmeans_restarts)
                )

        with timer.stage("training"):
            tape = Tape()
            z = model.forward(tape, features, graph.attributes).embedding
            if sampler is not None:
                noise = gaussian_noise(z.shape, config.noise_sigma, streams.noise)
                positive = tape.add(z, tape.constant(noise)) if anchor is None else tape.constant(anchor + noise)
                l_s = contrastive_loss(tape, z, positive, sampler.sample_all(), weights.tau)
            else:
                l_s = tape.constant(0.0)
            l_sa = reconstruction_loss(tape, z, dense_adjacency, attribute_gram=attribute_gram)
            l_r = regularization_loss(tape, z, graph_laplacian)
            loss = total_loss(tape, l_s, l_sa, l_r, weights)

            value = _scalar(loss)
            if not math.isfinite(value):
                raise NumericalError(f"Training error: epoch={epoch} total={value} reason=non_finite_loss")
            optimizer.zero_grad()
            backward(tape, loss)
            optimizer.step()

        record = EpochRecord(epoch, _scalar(l_s), _scalar(l_sa), _scalar(l_r), value)
        history.append(record)
        logger.debug(
            "Training epoch: epoch=%d total=%.6f l_s=%.6f l_sa=%.6f l_r=%.6f",
            epoch,
            record.total,
            record.contrastive,
            record.reconstruction,
            record.regularization,
        )

        if spectral_on and config.spectral is SpectralSchedule.EACH_EPOCH and sampler is not None:
            with timer.stage("spectral"):
                anchor = propagate(z.value, graph, config.modulator, self_loop_isolated=config.self_loop_isolated)

        if monitor.update(value):
            converged = True
            logger.info("Training converged: epoch=%d total=%.6f tolerance=%g", epoch, value, config.tolerance)
            break

    with timer.stage("training"):
        embedding = model.embed(features, graph.attributes)

    enhanced = embedding
    if config.end_to_end:
        # softmax is monotone per row, so its argmax is the argmax of Z
        partition = Partition(np.argmax(embedding, axis=1).astype(np.int64), config.k)
    else:
        if spectral_on:
            with timer.stage("spectral"):
                enhanced = propagate(embedding, graph, config.modulator, self_loop_isolated=config.self_loop_isolated)
        with timer.stage("clustering"):
            partition = kmeans(enhanced, config.k, streams.kmeans, restarts=config.kmeans_restarts)

    logger.info(
        "Training result: seed=%d epochs=%d converged=%s k_effective=%d final_total=%s",
        config.seed,
        len(history),
        converged,
        partition.k_effective,
        f"{history[-1].total:.6f}" if history else "n/a",
    )
    return FitResult(
        embedding=embedding,
        enhanced=enhanced,
        history=history,
        partition=partition,
        fusion_weights=model.fusion.weights,
        converged=converged,
        model=model,
        timings=dict(timer.seconds),
    )
