"""Graph loading, adjacency powers, normalizations and Laplacians."""

from __future__ import annotations

import logging
import math
from pathlib import Path

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from errors import (
    GraphError,
    GraphFormatError,
)
from models import (
    DenseMatrix,
    Graph,
    SparseMatrix,
)
from settings import (
    DENSE_FALLBACK_MAX_NODES,
    FILL_IN_BUDGET_FACTOR,
)

logger = logging.getLogger(__name__)


def validate_sparse(matrix: SparseMatrix) -> SparseMatrix:
    """Check a matrix is canonical CSR with finite values and return it."""
    if not isinstance(matrix, sp.csr_array):
        raise GraphError(f"Sparse matrix error: expected_type=csr_array actual_type={type(matrix).__name__}")
    if not matrix.has_canonical_format:
        raise GraphError("Sparse matrix error: reason=non_canonical")
    if matrix.indptr[-1] != matrix.nnz or len(matrix.indptr) != matrix.shape[0] + 1:
        raise GraphError("Sparse matrix error: reason=inconsistent_offsets")
    if not np.all(np.isfinite(matrix.data)):
        raise GraphError("Sparse matrix error: reason=non_finite")
    return matrix


def canonical(matrix: sp.sparray | sp.spmatrix) -> SparseMatrix:
    """Convert any scipy sparse matrix to canonical float64 CSR without explicit zeros."""
    result = sp.csr_array(matrix, dtype=np.float64)
    result.sum_duplicates()
    result.eliminate_zeros()
    result.sort_indices()
    return result


def is_symmetric(matrix: SparseMatrix, *, atol: float = 0.0) -> bool:
    """Return whether a square sparse matrix equals its transpose within `atol`."""
    if matrix.shape[0] != matrix.shape[1]:
        return False
    difference = abs(matrix - matrix.T)
    return difference.nnz == 0 or float(difference.max()) <= atol


def build_graph(
    n: int,
    rows: npt.ArrayLike,
    cols: npt.ArrayLike,
    weights: npt.ArrayLike | None = None,
    *,
    attributes: DenseMatrix | None = None,
    labels: npt.NDArray[np.int64] | None = None,
) -> Graph:
    """Build a Graph from undirected edge endpoints, storing each edge in both triangle halves."""
    row_ids = np.asarray(rows, dtype=np.int64)
    col_ids = np.asarray(cols, dtype=np.int64)
    values = np.ones(row_ids.size) if weights is None else np.asarray(weights, dtype=np.float64)
    upper = sp.coo_array(
        (values, (np.minimum(row_ids, col_ids), np.maximum(row_ids, col_ids))),
        shape=(n, n),
    )
    adjacency = canonical(upper + upper.T)
    return Graph(adjacency=adjacency, attributes=attributes, labels=labels)


def load_edge_list(path: Path, n_hint: int | None = None) -> Graph:
    """Load an undirected graph from `u v` or `u v w` lines with 0-based ids.

    Lines starting with `#` and blank lines are skipped. Duplicate edges keep the
    first weight seen.
    """
    edges: dict[tuple[int, int], float] = {}
    duplicates = 0
    with path.open(encoding="utf-8") as file_obj:
        for line_number, raw_line in enumerate(file_obj, start=1):
            line = raw_line.strip()
            if not line or line.startswith("#"):
                continue
            u, v, weight = _parse_edge_line(line, line_number, path)
            key = (min(u, v), max(u, v))
            if key in edges:
                duplicates += 1
                continue
            edges[key] = weight

    if not edges:
        raise GraphFormatError(f"Edge list error: file={path} reason=empty")
    if duplicates:
        logger.warning("Edge list duplicates collapsed: file=%s duplicates=%d policy=keep_first", path, duplicates)

    max_id = max(max(key) for key in edges)
    n = max_id + 1
    if n_hint is not None:
        if n_hint < n:
            raise GraphFormatError(
                f"Edge list error: file={path} n_hint={n_hint} max_id={max_id} reason=id_beyond_hint"
            )
        n = n_hint

    pairs = np.array(list(edges), dtype=np.int64)
    graph = build_graph(n, pairs[:, 0], pairs[:, 1], np.fromiter(edges.values(), dtype=np.float64))
    logger.info("Edge list loaded: file=%s nodes=%d edges=%d", path, graph.n, graph.edge_count)
    return graph


def _parse_edge_line(line: str, line_number: int, path: Path) -> tuple[int, int, float]:
    tokens = line.split()
    if len(tokens) not in (2, 3):
        raise GraphFormatError(
            f"Edge list parse error: file={path} line={line_number} reason=expected_2_or_3_fields", line=line_number
        )
    try:
        u, v = int(tokens[0]), int(tokens[1])
        weight = float(tokens[2]) if len(tokens) == 3 else 1.0
    except ValueError:
        raise GraphFormatError(
            f"Edge list parse error: file={path} line={line_number} reason=not_a_number", line=line_number
        ) from None
    if u < 0 or v < 0:
        raise GraphFormatError(
            f"Edge list parse error: file={path} line={line_number} reason=negative_id", line=line_number
        )
    if u == v:
        raise GraphFormatError(
            f"Edge list parse error: file={path} line={line_number} reason=self_loop", line=line_number
        )
    if not math.isfinite(weight) or weight <= 0:
        raise GraphFormatError(
            f"Edge list parse error: file={path} line={line_number} reason=non_positive_weight", line=line_number
        )
    return u, v, weight


def load_attributes(path: Path, *, header: bool = False) -> DenseMatrix:
    """Load an n×p attribute CSV of finite reals."""
    try:
        attributes = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise GraphFormatError(f"Attribute parse error: file={path} reason={exc}") from None
    if attributes.size == 0:
        raise GraphFormatError(f"Attribute parse error: file={path} reason=empty")
    if not np.all(np.isfinite(attributes)):
        raise GraphFormatError(f"Attribute parse error: file={path} reason=non_finite")
    return attributes


def load_labels(path: Path) -> npt.NDArray[np.int64]:
    """Load one integer label per line."""
    try:
        labels = np.loadtxt(path, dtype=np.int64, ndmin=1)
    except ValueError as exc:
        raise GraphFormatError(f"Label parse error: file={path} reason={exc}") from None
    if labels.size == 0:
        raise GraphFormatError(f"Label parse error: file={path} reason=empty")
    return labels


def export_edge_list(graph: Graph, path: Path) -> None:
    """Write each undirected edge once, with its weight when it is not 1."""
    upper = sp.triu(graph.adjacency, k=1, format="coo")
    weighted = bool(np.any(upper.data != 1.0))
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as file_obj:
        file_obj.write(f"# nodes={graph.n} edges={upper.nnz}\n")
        for u, v, weight in sorted(zip(upper.row.tolist(), upper.col.tolist(), upper.data.tolist(), strict=True)):
            file_obj.write(f"{u} {v} {weight:.17g}\n" if weighted else f"{u} {v}\n")


def binarize(matrix: SparseMatrix) -> SparseMatrix:
    """Replace every stored nonzero with 1."""
    result = matrix.copy()
    result.data = np.ones_like(result.data)
    return result


def matrix_power(
    adjacency: SparseMatrix,
    r: int,
    *,
    budget_factor: int = FILL_IN_BUDGET_FACTOR,
    dense_fallback: bool = False,
    binarize_powers: bool = False,
) -> list[SparseMatrix]:
    """Return `[A, A², …, Aʳ]` by repeated sparse-sparse multiplication.

    Entries count walks. If a power holds more than `budget_factor · nnz(A)` entries the
    computation stops, unless `dense_fallback` allows continuing densely for small graphs.
    """
    if r < 1:
        raise GraphError(f"Matrix power error: order={r} reason=order_below_one")
    validate_sparse(adjacency)
    n = adjacency.shape[0]
    budget = budget_factor * max(adjacency.nnz, 1)
    powers = [adjacency]
    current = adjacency
    dense_current: DenseMatrix | None = None
    for order in range(2, r + 1):
        if dense_current is None:
            current = canonical(current @ adjacency)
            if current.nnz > budget:
                if not dense_fallback or n > DENSE_FALLBACK_MAX_NODES:
                    raise GraphError(
                        f"Matrix power error: order={order} nnz={current.nnz} budget={budget} "
                        "reason=fill_in_budget_exceeded hint=--dense-fallback"
                    )
                logger.info("Matrix power dense fallback: order=%d nnz=%d budget=%d", order, current.nnz, budget)
                dense_current = current.toarray()
        else:
            dense_current = dense_current @ adjacency.toarray()
            current = canonical(sp.csr_array(dense_current))
        powers.append(current)
        logger.debug("Matrix power result: order=%d nnz=%d", order, current.nnz)

    if binarize_powers:
        return [binarize(power) for power in powers]
    return powers


def sym_normalize(matrix: SparseMatrix) -> SparseMatrix:
    """Return D̂^{-1/2}(M + I)D̂^{-1/2}, D̂ the row sums of M + I."""
    n = matrix.shape[0]
    with_loops = matrix + sp.eye_array(n, format="csr")
    row_sums = np.asarray(with_loops.sum(axis=1)).ravel()
    scale = sp.diags_array(1.0 / np.sqrt(row_sums))
    return canonical(scale @ with_loops @ scale)


def laplacian(graph: Graph) -> SparseMatrix:
    """Return the combinatorial Laplacian L = D − W."""
    return canonical(sp.diags_array(graph.degree) - graph.adjacency)


def random_walk_matrix(graph: Graph, *, self_loop_isolated: bool = False) -> SparseMatrix:
    """Return the row-stochastic transition matrix D⁻¹A.

    Isolated nodes have no transition row; they raise unless `self_loop_isolated`
    gives each one a unit self-loop inside this operator only.
    """
    adjacency: SparseMatrix = graph.adjacency
    degree = graph.degree
    isolated = graph.isolated_nodes()
    if isolated.size:
        if not self_loop_isolated:
            shown = ",".join(str(node) for node in isolated[:10].tolist())
            raise GraphError(
                f"Random walk error: isolated_nodes={shown} count={isolated.size} reason=zero_degree "
                "hint=--self-loop-isolated"
            )
        loops = np.zeros(graph.n)
        loops[isolated] = 1.0
        adjacency = canonical(adjacency + sp.diags_array(loops))
        degree = degree + loops
    return canonical(sp.diags_array(1.0 / degree) @ adjacency)


def rw_laplacian(graph: Graph, *, self_loop_isolated: bool = False) -> SparseMatrix:
    """Return the random-walk normalized Laplacian L̄ = I − D⁻¹A."""
    transition = random_walk_matrix(graph, self_loop_isolated=self_loop_isolated)
    return canonical(sp.eye_array(graph.n, format="csr") - transition)


def structural_features(graph: Graph) -> DenseMatrix:
    """Return the rows of sym_normalize(A), the stand-in attributes of plain graphs."""
    return sym_normalize(graph.adjacency).toarray()
