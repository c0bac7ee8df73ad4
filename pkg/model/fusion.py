"""Modularity-weighted aggregation of the per-order GCN outputs."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt

from autodiff.tape import (
    Node,
    Tape,
)
from errors import ShapeError
from models import (
    AggregationMode,
    DenseMatrix,
    FusionConfig,
)

logger = logging.getLogger(__name__)


def fusion_weights(modularities: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Return the softmax of the per-order modularities."""
    scores = np.asarray(modularities, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0 or not np.all(np.isfinite(scores)):
        raise ValueError(f"Fusion weight error: modularities={scores.tolist()} reason=invalid")
    exponentials = np.exp(scores - scores.max())
    return exponentials / exponentials.sum()


def fused_width(widths: Sequence[int], config: FusionConfig, attribute_width: int = 0) -> int:
    """Return the column count `fuse` produces for stacks of the given widths."""
    width = widths[0] if config.mode is AggregationMode.SUM else sum(widths)
    return width + (attribute_width if config.include_attributes else 0)


def fuse_nodes(tape: Tape, hidden: Sequence[Node], config: FusionConfig, attributes: Node | None = None) -> Node:
    """Record the weighted aggregation of `hidden`; alpha is a constant of the tape."""
    if len(hidden) != len(config.weights):
        raise ShapeError(f"Shape error: op=fuse inputs={len(hidden)} weights={len(config.weights)}")
    weighted = [h if alpha == 1.0 else tape.scale(h, alpha) for h, alpha in zip(hidden, config.weights, strict=True)]

    if config.mode is AggregationMode.SUM:
        shapes = {h.shape for h in hidden}
        if len(shapes) != 1:
            raise ShapeError(f"Shape error: op=fuse mode=sum shapes={sorted(shapes)}")
        fused = weighted[0]
        for h in weighted[1:]:
            fused = tape.add(fused, h)
        blocks = [fused]
    else:
        blocks = weighted

    if config.include_attributes:
        if attributes is None:
            raise ShapeError("Shape error: op=fuse reason=attributes_missing")
        blocks = [*blocks, attributes]
    return blocks[0] if len(blocks) == 1 else tape.concat_columns(blocks)


def fuse(
    hidden: Sequence[DenseMatrix],
    config: FusionConfig,
    attributes: DenseMatrix | None = None,
) -> DenseMatrix:
    """Aggregate dense matrices by the weighted sum or weighted concatenation."""
    tape = Tape()
    attribute_node = tape.constant(attributes) if attributes is not None else None
    return fuse_nodes(tape, [tape.constant(h) for h in hidden], config, attribute_node).value
