"""Contrastive, reconstruction and graph-regularization losses, each recorded on a Tape."""

from __future__ import annotations

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from autodiff.tape import (
    Node,
    Tape,
)
from errors import ShapeError
from models import (
    DenseMatrix,
    LossWeights,
    SparseMatrix,
)


def contrastive_loss(
    tape: Tape,
    z: Node,
    z_positive: Node,
    negatives: npt.NDArray[np.intp],
    tau: float,
) -> Node:
    """Return L_s = mean_i [log σ(z_i·z⁺_i/τ) − mean_j log σ(z_i·z_j/τ)].

    `negatives` holds m sampled node ids per row of `z`.
    """
    if z.shape != z_positive.shape:
        raise ShapeError(f"Shape error: op=contrastive_loss z={z.shape} z_positive={z_positive.shape}")
    if negatives.ndim != 2 or negatives.shape[0] != z.shape[0] or negatives.shape[1] == 0:
        raise ShapeError(f"Shape error: op=contrastive_loss z={z.shape} negatives={negatives.shape}")
    if tau <= 0:
        raise ValueError(f"Contrastive loss error: tau={tau} reason=not_positive")
    n, m = negatives.shape

    positive = tape.log_sigmoid(tape.scale(tape.dot_rows(z, z_positive), 1.0 / tau))
    anchors = tape.gather_rows(z, np.repeat(np.arange(n), m))
    contrasts = tape.gather_rows(z, negatives.ravel())
    negative = tape.log_sigmoid(tape.scale(tape.dot_rows(anchors, contrasts), 1.0 / tau))
    # every node has exactly m negatives, so the flat mean equals the mean of per-node means
    return tape.sub(tape.mean(positive), tape.mean(negative))


def reconstruction_loss(
    tape: Tape,
    z: Node,
    adjacency: SparseMatrix | DenseMatrix,
    attributes: DenseMatrix | None = None,
    *,
    attribute_gram: DenseMatrix | None = None,
) -> Node:
    """Return (‖ZZᵀ − A‖² + ‖ZZᵀ − XXᵀ‖²) / n².

    Pass `attribute_gram` (XXᵀ) instead of `attributes` to reuse it across epochs.
    """
    n = z.shape[0]
    dense_adjacency = adjacency.toarray() if sp.issparse(adjacency) else np.asarray(adjacency)
    if attribute_gram is None:
        if attributes is None:
            raise ShapeError("Shape error: op=reconstruction_loss reason=attributes_missing")
        attribute_gram = attributes @ attributes.T
    if dense_adjacency.shape != (n, n) or attribute_gram.shape != (n, n):
        raise ShapeError(
            f"Shape error: op=reconstruction_loss z={z.shape} adjacency={dense_adjacency.shape} "
            f"attribute_gram={attribute_gram.shape}"
        )
    similarity = tape.gram(z)
    structure = tape.frobenius_squared(tape.sub(similarity, tape.constant(dense_adjacency)))
    attribute = tape.frobenius_squared(tape.sub(similarity, tape.constant(attribute_gram)))
    return tape.scale(tape.add(structure, attribute), 1.0 / (n * n))


def regularization_loss(tape: Tape, z: Node, laplacian: SparseMatrix) -> Node:
    """Return tr(Zᵀ L Z) / n for the combinatorial Laplacian L."""
    return tape.scale(tape.trace_quadratic(laplacian, z), 1.0 / z.shape[0])


def total_loss(tape: Tape, contrastive: Node, reconstruction: Node, regularization: Node, weights: LossWeights) -> Node:
    """Return β·L_sa + γ·L_r − L_s."""
    weighted = tape.add(tape.scale(reconstruction, weights.beta), tape.scale(regularization, weights.gamma))
    return tape.sub(weighted, contrastive)
