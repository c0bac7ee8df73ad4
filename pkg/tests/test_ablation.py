from __future__ import annotations

import dataclasses
import statistics

import pytest

from clustering.metrics import (
    pair_counts,
    pair_metrics,
)
from models import (
    LossWeights,
    Partition,
    SpectralSchedule,
    TrainConfig,
)
from providers.sbm import generate_sbm
from services.ablation import ABLATION_VARIANTS
from settings import (
    DEFAULT_EPOCHS,
    DEFAULT_SBM_BLOCK_SIZE,
    DEFAULT_SBM_BLOCKS,
    DEFAULT_SBM_P_IN,
    DEFAULT_SBM_P_OUT,
)
from training.trainer import (
    FitResult,
    fit,
)

SEEDS = (1, 2, 3)
VARIANTS = {variant.name: variant for variant in ABLATION_VARIANTS}

pytestmark = pytest.mark.slow


def train_default(variant_name: str) -> dict[int, FitResult]:
    results: dict[int, FitResult] = {}
    for seed in SEEDS:
        graph = generate_sbm(DEFAULT_SBM_BLOCKS, DEFAULT_SBM_BLOCK_SIZE, DEFAULT_SBM_P_IN, DEFAULT_SBM_P_OUT, seed)
        train, weights = VARIANTS[variant_name].apply(TrainConfig(seed=seed, k=DEFAULT_SBM_BLOCKS), LossWeights())
        results[seed] = fit(graph, train, weights)
    return results


def median_f1(results: dict[int, FitResult]) -> float:
    scores: list[float] = []
    for seed, result in results.items():
        graph = generate_sbm(DEFAULT_SBM_BLOCKS, DEFAULT_SBM_BLOCK_SIZE, DEFAULT_SBM_P_IN, DEFAULT_SBM_P_OUT, seed)
        assert graph.labels is not None
        scores.append(pair_metrics(pair_counts(result.partition, Partition.from_labels(graph.labels))).f1)
    return statistics.median(scores)


@pytest.fixture(scope="module")
def full_runs() -> dict[int, FitResult]:
    return train_default("sdge-cat")


@pytest.fixture(scope="module")
def unpropagated_runs() -> dict[int, FitResult]:
    return train_default("sdge-cat-no-sp")


def test_default_variant_keeps_the_default_configuration() -> None:
    train, weights = VARIANTS["sdge-cat"].apply(TrainConfig(k=DEFAULT_SBM_BLOCKS), LossWeights())

    assert train == TrainConfig(k=DEFAULT_SBM_BLOCKS)
    assert weights == LossWeights()
    assert train.spectral is SpectralSchedule.POST


def test_defaults_recover_the_four_block_model(full_runs: dict[int, FitResult]) -> None:
    score = median_f1(full_runs)

    assert score >= 0.9


@pytest.mark.parametrize("seed", SEEDS)
def test_defaults_lower_the_total_loss(full_runs: dict[int, FitResult], seed: int) -> None:
    history = full_runs[seed].history

    assert 0 < len(history) <= DEFAULT_EPOCHS
    assert history[-1].total < history[0].total


def test_propagation_ranks_above_the_unpropagated_variant(
    full_runs: dict[int, FitResult],
    unpropagated_runs: dict[int, FitResult],
) -> None:
    full = median_f1(full_runs)
    unpropagated = median_f1(unpropagated_runs)

    assert unpropagated < full


@pytest.mark.parametrize("seed", SEEDS)
def test_propagation_adds_spectral_stage_time(
    full_runs: dict[int, FitResult],
    unpropagated_runs: dict[int, FitResult],
    seed: int,
) -> None:
    on = full_runs[seed].timings
    off = unpropagated_runs[seed].timings

    assert on["spectral"] > 0.0
    assert off["spectral"] == 0.0
    assert on["spectral"] > off["spectral"]


def test_unpropagated_variant_clusters_the_raw_embedding(unpropagated_runs: dict[int, FitResult]) -> None:
    for result in unpropagated_runs.values():
        assert result.enhanced is result.embedding
