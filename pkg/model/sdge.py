"""The full SDGE forward pass: r GCN stacks, fusion and the MLP head."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import (
    dataclass,
    replace,
)

import numpy as np
import numpy.typing as npt

from autodiff.tape import (
    Node,
    Parameter,
    Tape,
)
from errors import ShapeError
from model.fusion import (
    fuse_nodes,
    fused_width,
)
from model.layers import (
    GcnStack,
    MlpHead,
)
from models import (
    DenseMatrix,
    FusionConfig,
    SparseMatrix,
    TrainConfig,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ForwardPass:
    """Nodes of one recorded forward pass."""

    hidden: list[Node]
    fused: Node
    embedding: Node


def gcn_forward(tape: Tape, stacks: Sequence[GcnStack], x: Node) -> list[Node]:
    """Run every stack on the same input and return the r final-layer outputs."""
    return [stack(tape, x) for stack in stacks]


def mlp_forward(tape: Tape, fused: Node, head: MlpHead) -> Node:
    """Map the fused matrix to the embedding Z."""
    if fused.shape[1] != head.in_width:
        raise ShapeError(f"Shape error: op=mlp_forward input={fused.shape} expected_width={head.in_width}")
    return head(tape, fused)


class SdgeModel:
    """Parameters and forward pass of one SDGE network."""

    def __init__(
        self,
        propagations: Sequence[SparseMatrix],
        input_width: int,
        config: TrainConfig,
        *,
        attribute_width: int = 0,
        rng: np.random.Generator,
    ) -> None:
        """Create one stack per propagation matrix plus the head sized for the fused width."""
        if not propagations:
            raise ShapeError("Shape error: op=sdge_model reason=no_propagation_matrices")
        self.config = config
        self.input_width = input_width
        self.attribute_width = attribute_width
        self.stacks = [
            GcnStack(
                order,
                propagation,
                input_width,
                config.layer_widths,
                activation=config.activation,
                dyrelu=config.dyrelu,
                rng=rng,
            )
            for order, propagation in enumerate(propagations, start=1)
        ]
        r = len(self.stacks)
        self.fusion = FusionConfig(
            mode=config.aggregation,
            include_attributes=config.include_attributes and attribute_width > 0,
            weights=tuple([1.0 / r] * r),
        )
        head_width = fused_width([stack.output_width for stack in self.stacks], self.fusion, attribute_width)
        self.head = MlpHead(head_width, config.hidden_width, config.output_width, rng)
        logger.debug(
            "Model built: stacks=%d input_width=%d head_width=%d output_width=%d parameters=%d",
            r,
            input_width,
            head_width,
            config.output_width,
            sum(parameter.size for parameter in self.parameters()),
        )

    @property
    def order(self) -> int:
        """Return the number of stacks r."""
        return len(self.stacks)

    def parameters(self) -> list[Parameter]:
        """Return every trainable parameter, stacks first."""
        stacks = [parameter for stack in self.stacks for parameter in stack.parameters()]
        return [*stacks, *self.head.parameters()]

    def named_parameters(self) -> dict[str, Parameter]:
        """Return the parameters keyed by their unique names."""
        named = {parameter.name: parameter for parameter in self.parameters()}
        if len(named) != len(self.parameters()):
            raise ShapeError("Shape error: op=named_parameters reason=duplicate_name")
        return named

    def set_fusion_weights(self, weights: npt.ArrayLike) -> None:
        """Replace alpha; the new weights act as constants in later backward passes."""
        alpha = tuple(float(value) for value in np.asarray(weights, dtype=np.float64))
        if len(alpha) != self.order:
            raise ShapeError(f"Shape error: op=set_fusion_weights weights={len(alpha)} stacks={self.order}")
        self.fusion = replace(self.fusion, weights=alpha)

    def head_input_parameter_count(self) -> int:
        """Return the number of weights in the first head layer."""
        return self.head.hidden.weight.size

    def forward(self, tape: Tape, features: DenseMatrix, attributes: DenseMatrix | None = None) -> ForwardPass:
        """Record the whole network on `tape`."""
        x = tape.constant(features)
        hidden = gcn_forward(tape, self.stacks, x)
        attribute_node = None
        if self.fusion.include_attributes and attributes is not None:
            attribute_node = tape.constant(attributes)
        fused = fuse_nodes(tape, hidden, self.fusion, attribute_node)
        return ForwardPass(hidden=hidden, fused=fused, embedding=mlp_forward(tape, fused, self.head))

    def embed(self, features: DenseMatrix, attributes: DenseMatrix | None = None) -> DenseMatrix:
        """Return Z for the current parameters without keeping the tape."""
        return self.forward(Tape(), features, attributes).embedding.value
