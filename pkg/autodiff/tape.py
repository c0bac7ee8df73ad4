"""Tape-based reverse-mode differentiation for the SDGE computational graph.

Every primitive computes its forward value immediately, records itself on the
tape with the cache its vector-Jacobian product needs, and returns a `Node`.
Sparse matrices only ever enter as constants, so no gradient reaches an adjacency.
"""

from __future__ import annotations

import logging
from collections.abc import (
    Callable,
    Sequence,
)
from dataclasses import (
    dataclass,
    field,
)
from typing import Any

import numpy as np
import numpy.typing as npt
from scipy.special import expit

from errors import ShapeError
from models import (
    DenseMatrix,
    SparseMatrix,
)
from settings import BATCH_NORM_EPS

logger = logging.getLogger(__name__)

type Forward = Callable[..., tuple[DenseMatrix, Any]]
type Backward = Callable[[DenseMatrix, Any], tuple[DenseMatrix | None, ...]]


@dataclass(eq=False)
class Parameter:
    """A trainable dense tensor and its accumulated gradient."""

    name: str
    value: DenseMatrix
    grad: DenseMatrix = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Store the value as float64 and allocate a matching zero gradient."""
        self.value = np.array(self.value, dtype=np.float64)
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self) -> tuple[int, ...]:
        """Return the tensor shape."""
        return tuple(self.value.shape)

    @property
    def size(self) -> int:
        """Return the number of scalar entries."""
        return int(self.value.size)

    def zero_grad(self) -> None:
        """Reset the gradient before the next optimization step."""
        self.grad.fill(0.0)


@dataclass(frozen=True, eq=False)
class Node:
    """Handle to one value recorded on a tape."""

    id: int
    value: DenseMatrix = field(repr=False)
    tape: Tape = field(repr=False)

    @property
    def shape(self) -> tuple[int, ...]:
        """Return the value shape."""
        return tuple(self.value.shape)


@dataclass(frozen=True)
class Record:
    """One primitive application: inputs, output, and what the backward pass needs."""

    op: str
    inputs: tuple[int, ...]
    output: int
    forward: Forward = field(repr=False)
    backward: Backward = field(repr=False)
    cache: Any = field(repr=False)


class Tape:
    """Ordered record of primitive operations; inputs are always recorded before consumers."""

    def __init__(self) -> None:
        """Start an empty tape."""
        self.records: list[Record] = []
        self.values: list[DenseMatrix] = []
        self.leaves: dict[int, Parameter | None] = {}
        self._parameter_nodes: dict[int, Node] = {}

    def constant(self, value: npt.ArrayLike) -> Node:
        """Record a leaf that receives no gradient."""
        node = self._new_node(np.asarray(value, dtype=np.float64))
        self.leaves[node.id] = None
        return node

    def parameter(self, parameter: Parameter) -> Node:
        """Record (once per tape) a leaf whose gradient flows into `parameter.grad`."""
        existing = self._parameter_nodes.get(id(parameter))
        if existing is not None:
            return existing
        node = self._new_node(parameter.value)
        self.leaves[node.id] = parameter
        self._parameter_nodes[id(parameter)] = node
        return node

    def parameters(self) -> list[Parameter]:
        """Return the parameters recorded on this tape, in recording order."""
        return [parameter for parameter in self.leaves.values() if parameter is not None]

    def _new_node(self, value: DenseMatrix) -> Node:
        node = Node(id=len(self.values), value=value, tape=self)
        self.values.append(value)
        return node

    def _apply(self, op: str, inputs: Sequence[Node], forward: Forward, backward: Backward) -> Node:
        for node in inputs:
            if node.tape is not self:
                raise ShapeError(f"Tape error: op={op} node={node.id} reason=foreign_tape")
        output, cache = forward(*(self.values[node.id] for node in inputs))
        node = self._new_node(output)
        self.records.append(Record(op, tuple(node.id for node in inputs), node.id, forward, backward, cache))
        return node

    def replay(self) -> list[DenseMatrix]:
        """Recompute every recorded value from the leaves, in tape order."""
        values = list(self.values)
        for record in self.records:
            values[record.output], _ = record.forward(*(values[index] for index in record.inputs))
        return values

    # Primitives.

    def matmul(self, a: Node, b: Node) -> Node:
        """Dense matrix product."""
        _require(len(a.shape) == 2 and len(b.shape) == 2 and a.shape[1] == b.shape[0], "matmul", a, b)

        def forward(x: DenseMatrix, y: DenseMatrix) -> tuple[DenseMatrix, tuple[DenseMatrix, DenseMatrix]]:
            return x @ y, (x, y)

        def backward(grad: DenseMatrix, cache: tuple[DenseMatrix, DenseMatrix]) -> tuple[DenseMatrix, DenseMatrix]:
            x, y = cache
            return grad @ y.T, x.T @ grad

        return self._apply("matmul", (a, b), forward, backward)

    def spmm(self, matrix: SparseMatrix, b: Node) -> Node:
        """Product of a constant sparse matrix with a dense node."""
        if matrix.shape[1] != b.shape[0] or len(b.shape) != 2:
            raise ShapeError(f"Shape error: op=spmm shapes={matrix.shape},{b.shape}")

        def forward(x: DenseMatrix) -> tuple[DenseMatrix, None]:
            return np.asarray(matrix @ x), None

        def backward(grad: DenseMatrix, cache: None) -> tuple[DenseMatrix]:
            del cache
            return (np.asarray(matrix.T @ grad),)

        return self._apply("spmm", (b,), forward, backward)

    def gram(self, a: Node) -> Node:
        """Return a·aᵀ."""
        _require(len(a.shape) == 2, "gram", a)

        def forward(x: DenseMatrix) -> tuple[DenseMatrix, DenseMatrix]:
            return x @ x.T, x

        def backward(grad: DenseMatrix, x: DenseMatrix) -> tuple[DenseMatrix]:
            return ((grad + grad.T) @ x,)

        return self._apply("gram", (a,), forward, backward)

    def add(self, a: Node, b: Node) -> Node:
        """Elementwise sum; `b` may also be a single row broadcast over the rows of `a`."""
        broadcast = len(a.shape) == 2 and b.shape == (1, a.shape[1]) and a.shape[0] != 1
        _require(a.shape == b.shape or broadcast, "add", a, b)

        def forward(x: DenseMatrix, y: DenseMatrix) -> tuple[DenseMatrix, None]:
            return x + y, None

        def backward(grad: DenseMatrix, cache: None) -> tuple[DenseMatrix, DenseMatrix]:
            del cache
            return grad, grad.sum(axis=0, keepdims=True) if broadcast else grad

        return self._apply("add", (a, b), forward, backward)

    def scale(self, a: Node, factor: float) -> Node:
        """Multiply by a constant."""

        def forward(x: DenseMatrix) -> tuple[DenseMatrix, None]:
            return factor * x, None

        def backward(grad: DenseMatrix, cache: None) -> tuple[DenseMatrix]:
            del cache
            return (factor * grad,)

        return self._apply("scale", (a,), forward, backward)

    def sub(self, a: Node, b: Node) -> Node:
        """Elementwise difference."""
        return self.add(a, self.scale(b, -1.0))

    def shift(self, a: Node, offset: float) -> Node:
        """Add a constant to every entry."""

        def forward(x: DenseMatrix) -> tuple[DenseMatrix, None]:
            return x + offset, None

        def backward(grad: DenseMatrix, cache: None) -> tuple[DenseMatrix]:
            del cache
            return (grad,)

        return self._apply("shift", (a,), forward, backward)

    def sigmoid(self, a: Node) -> Node:
        """Elementwise logistic function."""

        def forward(x: DenseMatrix) -> tuple[DenseMatrix, DenseMatrix]:
            y = expit(x)
            return y, y

        def backward(grad: DenseMatrix, y: DenseMatrix) -> tuple[DenseMatrix]:
            return (grad * y * (1.0 - y),)

        return self._apply("sigmoid", (a,), forward, backward)

    def log_sigmoid(self, a: Node) -> Node:
        """Elementwise log σ(x), evaluated as −log(1 + e^{−x}) without overflow."""

        def forward(x: DenseMatrix) -> tuple[DenseMatrix, DenseMatrix]:
            return -np.logaddexp(0.0, -x), x

        def backward(grad: DenseMatrix, x: DenseMatrix) -> tuple[DenseMatrix]:
            return (grad * expit(-x),)

        return self._apply("log_sigmoid", (a,), forward, backward)

    def max_affine(self, x: Node, slopes: Sequence[Node], intercepts: Sequence[Node]) -> Node:
        """Per entry, the maximum over pieces k of `slopes[k]·x + intercepts[k]`.

        Coefficients are single rows broadcast over the rows of `x`. Ties pick the lowest
        piece; the subgradient follows the selected piece.
        """
        if not slopes or len(slopes) != len(intercepts):
            raise ShapeError(f"Shape error: op=max_affine pieces={len(slopes)},{len(intercepts)}")
        row_shape = (1, x.shape[1])
        for coefficient in (*slopes, *intercepts):
            _require(coefficient.shape == row_shape, "max_affine", x, coefficient)
        pieces = len(slopes)

        def forward(value: DenseMatrix, *coefficients: DenseMatrix) -> tuple[DenseMatrix, Any]:
            a = np.stack(coefficients[:pieces])
            b = np.stack(coefficients[pieces:])
            candidates = a * value[None, :, :] + b
            selected = np.argmax(candidates, axis=0)
            output = np.take_along_axis(candidates, selected[None], axis=0)[0]
            return output, (value, a, selected)

        def backward(grad: DenseMatrix, cache: Any) -> tuple[DenseMatrix, ...]:
            value, a, selected = cache
            masks = selected[None, :, :] == np.arange(pieces)[:, None, None]
            grad_x = grad * np.take_along_axis(np.broadcast_to(a, masks.shape), selected[None], axis=0)[0]
            grad_slopes = tuple((grad * value * mask).sum(axis=0, keepdims=True) for mask in masks)
            grad_intercepts = tuple((grad * mask).sum(axis=0, keepdims=True) for mask in masks)
            return (grad_x, *grad_slopes, *grad_intercepts)

        return self._apply("max_affine", (x, *slopes, *intercepts), forward, backward)

    def row_mean(self, a: Node) -> Node:
        """Mean over rows, one value per column."""
        _require(len(a.shape) == 2 and a.shape[0] > 0, "row_mean", a)
        rows = a.shape[0]

        def forward(x: DenseMatrix) -> tuple[DenseMatrix, None]:
            return x.mean(axis=0, keepdims=True), None

        def backward(grad: DenseMatrix, cache: None) -> tuple[DenseMatrix]:
            del cache
            return (np.broadcast_to(grad / rows, a.shape).copy(),)

        return self._apply("row_mean", (a,), forward, backward)

    def batch_norm(self, x: Node, gamma: Node, beta: Node, eps: float = BATCH_NORM_EPS) -> Node:
        """Training-mode batch normalization over rows, gradients through the batch statistics."""
        row_shape = (1, x.shape[1])
        _require(len(x.shape) == 2 and gamma.shape == row_shape and beta.shape == row_shape, "batch_norm", x, gamma)
        rows = x.shape[0]

        def forward(value: DenseMatrix, scale: DenseMatrix, shift: DenseMatrix) -> tuple[DenseMatrix, Any]:
            centered = value - value.mean(axis=0, keepdims=True)
            inv_std = 1.0 / np.sqrt((centered**2).mean(axis=0, keepdims=True) + eps)
            normalized = centered * inv_std
            return scale * normalized + shift, (normalized, inv_std, scale)

        def backward(grad: DenseMatrix, cache: Any) -> tuple[DenseMatrix, DenseMatrix, DenseMatrix]:
            normalized, inv_std, scale = cache
            grad_normalized = grad * scale
            grad_x = (inv_std / rows) * (
                rows * grad_normalized
                - grad_normalized.sum(axis=0, keepdims=True)
                - normalized * (grad_normalized * normalized).sum(axis=0, keepdims=True)
            )
            return (
                grad_x,
                (grad * normalized).sum(axis=0, keepdims=True),
                grad.sum(axis=0, keepdims=True),
            )

        return self._apply("batch_norm", (x, gamma, beta), forward, backward)

    def frobenius_squared(self, a: Node) -> Node:
        """Sum of squared entries, a scalar."""

        def forward(x: DenseMatrix) -> tuple[DenseMatrix, DenseMatrix]:
            return np.asarray(np.sum(x * x)), x

        def backward(grad: DenseMatrix, x: DenseMatrix) -> tuple[DenseMatrix]:
            return (2.0 * grad * x,)

        return self._apply("frobenius_squared", (a,), forward, backward)

    def trace_quadratic(self, matrix: SparseMatrix, z: Node) -> Node:
        """tr(zᵀ M z) for a constant sparse M, a scalar."""
        if len(z.shape) != 2 or matrix.shape != (z.shape[0], z.shape[0]):
            raise ShapeError(f"Shape error: op=trace_quadratic shapes={matrix.shape},{z.shape}")

        def forward(x: DenseMatrix) -> tuple[DenseMatrix, DenseMatrix]:
            return np.asarray(np.sum(x * np.asarray(matrix @ x))), x

        def backward(grad: DenseMatrix, x: DenseMatrix) -> tuple[DenseMatrix]:
            return (grad * np.asarray(matrix @ x + matrix.T @ x),)

        return self._apply("trace_quadratic", (z,), forward, backward)

    def dot_rows(self, a: Node, b: Node) -> Node:
        """Row-wise dot products, an n×1 column."""
        _require(a.shape == b.shape and len(a.shape) == 2, "dot_rows", a, b)

        def forward(x: DenseMatrix, y: DenseMatrix) -> tuple[DenseMatrix, tuple[DenseMatrix, DenseMatrix]]:
            return np.sum(x * y, axis=1, keepdims=True), (x, y)

        def backward(grad: DenseMatrix, cache: tuple[DenseMatrix, DenseMatrix]) -> tuple[DenseMatrix, DenseMatrix]:
            x, y = cache
            return grad * y, grad * x

        return self._apply("dot_rows", (a, b), forward, backward)

    def gather_rows(self, a: Node, index: npt.NDArray[np.intp]) -> Node:
        """Select rows by index; repeated rows accumulate their gradients."""
        _require(len(a.shape) == 2, "gather_rows", a)
        rows = np.asarray(index, dtype=np.intp)

        def forward(x: DenseMatrix) -> tuple[DenseMatrix, None]:
            return x[rows], None

        def backward(grad: DenseMatrix, cache: None) -> tuple[DenseMatrix]:
            del cache
            result = np.zeros(a.shape)
            np.add.at(result, rows, grad)
            return (result,)

        return self._apply("gather_rows", (a,), forward, backward)

    def concat_columns(self, nodes: Sequence[Node]) -> Node:
        """Concatenate matrices with equal row counts side by side."""
        if not nodes or len({node.shape[0] for node in nodes}) != 1:
            raise ShapeError(f"Shape error: op=concat_columns shapes={[node.shape for node in nodes]}")
        boundaries = np.cumsum([node.shape[1] for node in nodes])[:-1]

        def forward(*values: DenseMatrix) -> tuple[DenseMatrix, None]:
            return np.hstack(values), None

        def backward(grad: DenseMatrix, cache: None) -> tuple[DenseMatrix, ...]:
            del cache
            return tuple(np.split(grad, boundaries, axis=1))

        return self._apply("concat_columns", tuple(nodes), forward, backward)

    def mean(self, a: Node) -> Node:
        """Mean of all entries, a scalar."""
        count = int(np.prod(a.shape))

        def forward(x: DenseMatrix) -> tuple[DenseMatrix, None]:
            return np.asarray(x.mean()), None

        def backward(grad: DenseMatrix, cache: None) -> tuple[DenseMatrix]:
            del cache
            return (np.full(a.shape, float(grad) / count),)

        return self._apply("mean", (a,), forward, backward)


def _require(condition: bool, op: str, *nodes: Node) -> None:
    if not condition:
        shapes = ",".join(str(node.shape) for node in nodes)
        raise ShapeError(f"Shape error: op={op} shapes={shapes}")


def backward(tape: Tape, loss: Node) -> dict[int, DenseMatrix]:
    """Propagate d(loss)/d(·) through the tape and accumulate into every recorded Parameter.

    Returns the adjoint of every node that influences the loss.
    """
    if loss.tape is not tape:
        raise ShapeError(f"Backward error: node={loss.id} reason=foreign_tape")
    if loss.value.size != 1 or loss.value.ndim not in (0, 2):
        raise ShapeError(f"Backward error: node={loss.id} shape={loss.shape} reason=loss_not_scalar")

    adjoints: dict[int, DenseMatrix] = {loss.id: np.ones_like(loss.value)}
    for record in reversed(tape.records):
        grad = adjoints.get(record.output)
        if grad is None:
            continue
        for index, input_grad in zip(record.inputs, record.backward(grad, record.cache), strict=True):
            if input_grad is None:
                continue
            adjoints[index] = adjoints[index] + input_grad if index in adjoints else input_grad

    for node_id, parameter in tape.leaves.items():
        if parameter is not None and node_id in adjoints:
            parameter.grad += adjoints[node_id]
    return adjoints
