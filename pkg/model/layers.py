"""Building blocks of the SDGE network, each recording itself on a Tape."""

from __future__ import annotations

import logging
from abc import (
    ABC,
    abstractmethod,
)
from collections.abc import Sequence

import numpy as np

from autodiff.tape import (
    Node,
    Parameter,
    Tape,
)
from errors import (
    NumericalError,
    ShapeError,
)
from models import (
    Activation,
    DenseMatrix,
    DyReluConfig,
    SparseMatrix,
)

logger = logging.getLogger(__name__)


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> DenseMatrix:
    """Draw a fan_in×fan_out matrix from the Glorot uniform distribution."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class Module(ABC):
    """Something with parameters that maps a node to a node."""

    @abstractmethod
    def parameters(self) -> list[Parameter]:
        """Return trainable parameters in a stable order."""

    @abstractmethod
    def __call__(self, tape: Tape, x: Node) -> Node:
        """Record the forward pass."""


class Linear(Module):
    """Affine map x·W + b."""

    def __init__(self, name: str, in_width: int, out_width: int, rng: np.random.Generator) -> None:
        """Initialize Glorot weights and a zero bias."""
        self.in_width = in_width
        self.out_width = out_width
        self.weight = Parameter(f"{name}.weight", glorot(rng, in_width, out_width))
        self.bias = Parameter(f"{name}.bias", np.zeros((1, out_width)))

    def parameters(self) -> list[Parameter]:
        """Return weight and bias."""
        return [self.weight, self.bias]

    def __call__(self, tape: Tape, x: Node) -> Node:
        """Record x·W + b."""
        if x.shape[-1] != self.in_width:
            raise ShapeError(
                f"Shape error: op=linear name={self.weight.name} input={x.shape} weight={self.weight.shape}"
            )
        return tape.add(tape.matmul(x, tape.parameter(self.weight)), tape.parameter(self.bias))


def relu(tape: Tape, x: Node) -> Node:
    """Record max(x, 0) as a two-piece max-affine with constant coefficients."""
    width = x.shape[1]
    ones, zeros = tape.constant(np.ones((1, width))), tape.constant(np.zeros((1, width)))
    return tape.max_affine(x, (ones, zeros), (zeros, zeros))


class ReLU(Module):
    """Plain rectifier, the ablation counterpart of DynamicReLU."""

    def parameters(self) -> list[Parameter]:
        """Return no parameters."""
        return []

    def __call__(self, tape: Tape, x: Node) -> Node:
        """Record max(x, 0)."""
        return relu(tape, x)


class DynamicReLU(Module):
    """Max of K affine pieces whose per-feature coefficients come from a hyper-net.

    The hyper-net reads the per-feature mean of its input over all nodes, applies
    Linear→ReLU and then one zero-initialized head per coefficient. Coefficients are
    `base + range · (2σ(u) − 1)`, with slope bases (1, 0, …) and intercept bases 0,
    so the freshly initialized unit is exactly max(x, 0).
    """

    def __init__(self, name: str, width: int, config: DyReluConfig, rng: np.random.Generator) -> None:
        """Create the context layer and the zero-initialized coefficient heads."""
        self.width = width
        self.config = config
        hidden = max(width // config.reduction, 1)
        self.context = Linear(f"{name}.context", width, hidden, rng)
        self.slope_heads = [self._zero_head(f"{name}.slope{piece}", hidden, width) for piece in range(config.pieces)]
        self.intercept_heads = [
            self._zero_head(f"{name}.intercept{piece}", hidden, width) for piece in range(config.pieces)
        ]

    @staticmethod
    def _zero_head(name: str, hidden: int, width: int) -> tuple[Parameter, Parameter]:
        return Parameter(f"{name}.weight", np.zeros((hidden, width))), Parameter(f"{name}.bias", np.zeros((1, width)))

    def parameters(self) -> list[Parameter]:
        """Return context and head parameters."""
        heads = [parameter for head in (*self.slope_heads, *self.intercept_heads) for parameter in head]
        return [*self.context.parameters(), *heads]

    def coefficients(self, tape: Tape, x: Node) -> tuple[list[Node], list[Node]]:
        """Record the hyper-net and return per-piece slope and intercept rows."""
        hidden = relu(tape, self.context(tape, tape.row_mean(x)))
        slopes: list[Node] = []
        intercepts: list[Node] = []
        for piece, (slope_head, intercept_head) in enumerate(zip(self.slope_heads, self.intercept_heads, strict=True)):
            slope_base = 1.0 if piece == 0 else 0.0
            slope = tape.scale(self._signed_unit(tape, hidden, slope_head), self.config.slope_range)
            slopes.append(tape.shift(slope, slope_base))
            intercepts.append(tape.scale(self._signed_unit(tape, hidden, intercept_head), self.config.intercept_range))
        return slopes, intercepts

    @staticmethod
    def _signed_unit(tape: Tape, hidden: Node, head: tuple[Parameter, Parameter]) -> Node:
        weight, bias = head
        logits = tape.add(tape.matmul(hidden, tape.parameter(weight)), tape.parameter(bias))
        return tape.shift(tape.scale(tape.sigmoid(logits), 2.0), -1.0)

    def __call__(self, tape: Tape, x: Node) -> Node:
        """Record the dynamic activation of x."""
        slopes, intercepts = self.coefficients(tape, x)
        return tape.max_affine(x, slopes, intercepts)


def dynamic_relu(x: DenseMatrix, config: DyReluConfig, *, seed: int = 0) -> DenseMatrix:
    """Apply a freshly initialized DynamicReLU to a dense matrix."""
    unit = DynamicReLU("dyrelu", x.shape[1], config, np.random.default_rng(seed))
    tape = Tape()
    return unit(tape, tape.constant(x)).value


class BatchNorm(Module):
    """Per-feature normalization over all nodes with learned scale and shift."""

    def __init__(self, name: str, width: int) -> None:
        """Start at unit scale and zero shift."""
        self.scale = Parameter(f"{name}.scale", np.ones((1, width)))
        self.shift = Parameter(f"{name}.shift", np.zeros((1, width)))

    def parameters(self) -> list[Parameter]:
        """Return scale and shift."""
        return [self.scale, self.shift]

    def __call__(self, tape: Tape, x: Node) -> Node:
        """Record the normalization."""
        return tape.batch_norm(x, tape.parameter(self.scale), tape.parameter(self.shift))


def make_activation(
    name: str, width: int, activation: Activation, config: DyReluConfig, rng: np.random.Generator
) -> Module:
    """Return the configured activation unit for one layer."""
    if activation is Activation.RELU:
        return ReLU()
    return DynamicReLU(name, width, config, rng)


class GcnLayer(Module):
    """One graph convolution: activation(batch_norm(S · H · W))."""

    def __init__(
        self,
        name: str,
        propagation: SparseMatrix,
        in_width: int,
        out_width: int,
        *,
        activation: Activation,
        dyrelu: DyReluConfig,
        rng: np.random.Generator,
    ) -> None:
        """Initialize the weight, batch norm and activation of the layer."""
        self.propagation = propagation
        self.weight = Parameter(f"{name}.weight", glorot(rng, in_width, out_width))
        self.norm = BatchNorm(f"{name}.norm", out_width)
        self.activation = make_activation(f"{name}.dyrelu", out_width, activation, dyrelu, rng)

    def parameters(self) -> list[Parameter]:
        """Return weight, batch norm and activation parameters."""
        return [self.weight, *self.norm.parameters(), *self.activation.parameters()]

    def __call__(self, tape: Tape, x: Node) -> Node:
        """Record the layer on `x`."""
        if x.shape[1] != self.weight.shape[0]:
            raise ShapeError(
                f"Shape error: op=gcn_layer name={self.weight.name} input={x.shape} weight={self.weight.shape}"
            )
        convolved = tape.spmm(self.propagation, tape.matmul(x, tape.parameter(self.weight)))
        return self.activation(tape, self.norm(tape, convolved))


class GcnStack(Module):
    """The GCN for one adjacency power: an input projection followed by chained layers.

    `widths` lists the input width and every layer output, so the default
    (200, 170, 140, 100) holds three convolutions. Inputs narrower or wider than
    `widths[0]` pass through a learned affine projection first.
    """

    def __init__(
        self,
        order: int,
        propagation: SparseMatrix,
        input_width: int,
        widths: Sequence[int],
        *,
        activation: Activation,
        dyrelu: DyReluConfig,
        rng: np.random.Generator,
    ) -> None:
        """Create the projection (when needed) and the layers."""
        name = f"stack{order}"
        self.order = order
        self.propagation = propagation
        self.input_width = input_width
        self.widths = tuple(widths)
        self.projection = (
            Linear(f"{name}.projection", input_width, self.widths[0], rng) if input_width != self.widths[0] else None
        )
        self.layers = [
            GcnLayer(
                f"{name}.layer{index}",
                propagation,
                in_width,
                out_width,
                activation=activation,
                dyrelu=dyrelu,
                rng=rng,
            )
            for index, (in_width, out_width) in enumerate(zip(self.widths, self.widths[1:], strict=False))
        ]

    @property
    def output_width(self) -> int:
        """Return the width of the last layer."""
        return self.widths[-1]

    def parameters(self) -> list[Parameter]:
        """Return projection and layer parameters."""
        projection = self.projection.parameters() if self.projection is not None else []
        return [*projection, *(parameter for layer in self.layers for parameter in layer.parameters())]

    def forward_layers(self, tape: Tape, x: Node) -> list[Node]:
        """Record every layer and return each layer output."""
        h = self.projection(tape, x) if self.projection is not None else x
        outputs = []
        for index, layer in enumerate(self.layers):
            h = layer(tape, h)
            if not np.all(np.isfinite(h.value)):
                raise NumericalError(
                    f"GCN forward error: stack={self.order} layer={index} reason=non_finite_activation"
                )
            outputs.append(h)
        return outputs

    def __call__(self, tape: Tape, x: Node) -> Node:
        """Record the stack and return its final output."""
        outputs = self.forward_layers(tape, x)
        if outputs:
            return outputs[-1]
        return self.projection(tape, x) if self.projection is not None else x


class MlpHead(Module):
    """Two sigmoid-activated affine layers mapping the fused matrix to Z."""

    def __init__(self, in_width: int, hidden_width: int, out_width: int, rng: np.random.Generator) -> None:
        """Create both layers."""
        self.hidden = Linear("head.hidden", in_width, hidden_width, rng)
        self.output = Linear("head.output", hidden_width, out_width, rng)

    @property
    def in_width(self) -> int:
        """Return the expected fused width."""
        return self.hidden.in_width

    def parameters(self) -> list[Parameter]:
        """Return both layers' parameters."""
        return [*self.hidden.parameters(), *self.output.parameters()]

    def __call__(self, tape: Tape, x: Node) -> Node:
        """Record sigmoid(sigmoid(x·W1 + b1)·W2 + b2)."""
        return tape.sigmoid(self.output(tape, tape.sigmoid(self.hidden(tape, x))))
