"""Band-pass spectral propagation Z ← D⁻¹A(I − L̃)Z.

L̃ = U g(Λ) U⁻¹ modulates the random-walk Laplacian L̄ = I − D⁻¹A. The filter
(I − L̃) is evaluated as a truncated Chebyshev series in (L̄ − I), whose spectrum
lies in [−1, 1], using only sparse products with Z.
"""

from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp
from numpy.polynomial import chebyshev

from errors import NumericalError
from graphs.core import random_walk_matrix
from models import (
    DenseMatrix,
    EmbeddingMatrix,
    Graph,
    ModulatorConfig,
    SparseMatrix,
)

logger = logging.getLogger(__name__)

type Modulator = Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]]

EXACT_FILTER_MAX_NODES = 500


def band_pass(config: ModulatorConfig) -> Modulator:
    """Return g(λ) = exp(−θ/2 · ((λ − μ)² − 1))."""

    def modulator(eigenvalues: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        return np.exp(-0.5 * ((eigenvalues - config.mu) ** 2 - 1.0) * config.theta)

    return modulator


def filter_coefficients(order: int, modulator: Modulator) -> npt.NDArray[np.float64]:
    """Chebyshev coefficients of x ↦ 1 − g(x + 1) on [−1, 1], x = λ − 1."""
    coefficients = np.asarray(
        chebyshev.chebinterpolate(lambda x: 1.0 - modulator(np.asarray(x) + 1.0), order), dtype=np.float64
    )
    # drop interpolation round-off so constant modulators give exact filters
    scale = max(float(np.max(np.abs(coefficients))), 1.0)
    coefficients[np.abs(coefficients) < 1e-14 * scale] = 0.0
    return coefficients


def chebyshev_filter(
    z: DenseMatrix,
    lbar: SparseMatrix,
    config: ModulatorConfig,
    modulator: Modulator | None = None,
) -> DenseMatrix:
    """Return (I − g(L̄))·Z by the three-term recurrence T_{k+1} = 2M·T_k − T_{k−1}, M = L̄ − I."""
    coefficients = filter_coefficients(config.order, modulator or band_pass(config))
    shifted = lbar - sp.eye_array(lbar.shape[0], format="csr")
    previous = z
    result = coefficients[0] * previous
    if coefficients.size == 1:
        return result
    current = np.asarray(shifted @ z)
    result = result + coefficients[1] * current
    for coefficient in coefficients[2:]:
        previous, current = current, 2.0 * np.asarray(shifted @ current) - previous
        result = result + coefficient * current
    return result


def exact_filter(
    z: DenseMatrix,
    lbar: SparseMatrix | DenseMatrix,
    config: ModulatorConfig,
    modulator: Modulator | None = None,
) -> DenseMatrix:
    """Return U(I − g(Λ))U⁻¹Z from a dense eigendecomposition; small graphs only."""
    n = lbar.shape[0]
    if n > EXACT_FILTER_MAX_NODES:
        raise ValueError(f"Exact filter error: nodes={n} limit={EXACT_FILTER_MAX_NODES} reason=too_large")
    dense = lbar.toarray() if sp.issparse(lbar) else np.asarray(lbar, dtype=np.float64)
    try:
        eigenvalues, vectors = np.linalg.eig(dense)
        # L̄ is similar to a symmetric matrix, so its spectrum is real
        response = 1.0 - (modulator or band_pass(config))(eigenvalues.real)
        result = vectors @ (response[:, None] * np.linalg.solve(vectors, z))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Exact filter error: nodes={n} reason={type(exc).__name__}") from None
    return np.asarray(result.real, dtype=np.float64)


def standardize_columns(z: DenseMatrix) -> DenseMatrix:
    """Center columns and scale them to unit population variance; constant columns become zero."""
    centered = z - z.mean(axis=0)
    std = centered.std(axis=0)
    return np.where(std > 0, centered / np.where(std > 0, std, 1.0), 0.0)


def propagate(
    z: EmbeddingMatrix,
    graph: Graph,
    config: ModulatorConfig,
    *,
    standardize_output: bool = True,
    self_loop_isolated: bool = False,
    modulator: Modulator | None = None,
) -> EmbeddingMatrix:
    """Return D⁻¹A·(I − L̃)·Z, column-standardized unless disabled."""
    transition = random_walk_matrix(graph, self_loop_isolated=self_loop_isolated)
    lbar = sp.eye_array(graph.n, format="csr") - transition
    propagated = np.asarray(transition @ chebyshev_filter(z, lbar, config, modulator))
    if not np.all(np.isfinite(propagated)):
        raise NumericalError("Spectral propagation error: reason=non_finite_output")
    logger.debug(
        "Spectral propagation result: nodes=%d columns=%d order=%d mu=%s theta=%s",
        graph.n,
        z.shape[1],
        config.order,
        config.mu,
        config.theta,
    )
    return standardize_columns(propagated) if standardize_output else propagated
