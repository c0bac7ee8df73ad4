"""Planted-partition graphs from the stochastic block model."""

from __future__ import annotations

import logging

import numpy as np

from errors import GraphError
from graphs.core import build_graph
from models import Graph
from providers.base import DatasetProvider
from utils import as_generator

logger = logging.getLogger(__name__)


def generate_sbm(
    blocks: int,
    block_size: int,
    p_in: float,
    p_out: float,
    seed: int | np.random.Generator,
) -> Graph:
    """Draw every within-block pair with probability p_in and every cross-block pair with p_out.

    Labels are the block ids; attributes are left empty.
    """
    if blocks < 1 or block_size < 1:
        raise GraphError(f"SBM error: blocks={blocks} block_size={block_size} reason=below_one")
    if not 0.0 <= p_out < p_in <= 1.0:
        raise GraphError(f"SBM error: p_in={p_in} p_out={p_out} reason=invalid_probabilities")

    n = blocks * block_size
    labels = np.repeat(np.arange(blocks, dtype=np.int64), block_size)
    expected_isolated = n * (1.0 - p_in) ** (block_size - 1) * (1.0 - p_out) ** (n - block_size)
    if expected_isolated >= 0.5:
        logger.warning(
            "SBM isolated nodes expected: nodes=%d expected=%.2f p_in=%s p_out=%s", n, expected_isolated, p_in, p_out
        )

    rows, cols = np.triu_indices(n, k=1)
    probabilities = np.where(labels[rows] == labels[cols], p_in, p_out)
    keep = as_generator(seed).random(rows.size) < probabilities
    graph = build_graph(n, rows[keep], cols[keep], labels=labels)

    isolated = graph.isolated_nodes().size
    if isolated:
        logger.warning("SBM isolated nodes drawn: nodes=%d isolated=%d", n, isolated)
    logger.info("SBM graph generated: blocks=%d block_size=%d edges=%d", blocks, block_size, graph.edge_count)
    return graph


class SbmProvider(DatasetProvider):
    """Generates the planted-partition benchmark graph in memory."""

    name = "sbm"

    def __init__(self, blocks: int, block_size: int, p_in: float, p_out: float, seed: int) -> None:
        """Store the generator parameters."""
        self.blocks = blocks
        self.block_size = block_size
        self.p_in = p_in
        self.p_out = p_out
        self.seed = seed

    def ensure_data(self) -> None:
        """Nothing to fetch for a generated graph."""

    def load(self) -> Graph:
        """Generate the graph."""
        return generate_sbm(self.blocks, self.block_size, self.p_in, self.p_out, self.seed)
