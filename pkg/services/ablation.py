"""Ablation suite: the aggregation, activation, spectral-propagation and GCN-AE variants on one dataset."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import Any

from models import (
    Activation,
    AggregationMode,
    ExperimentConfig,
    LossWeights,
    SpectralSchedule,
    TrainConfig,
)
from providers.base import DatasetProvider
from renderers.reports import write_rows
from renderers.summary import SummaryRenderer
from services.pipeline import (
    ExperimentPipeline,
    RunOutcome,
    aggregate_outcomes,
)
from settings import (
    AGGREGATE_FILE_NAME,
    SUMMARY_FILE_NAME,
    SUMMARY_TEMPLATE_NAME,
    TEMPLATE_DIR,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Variant:
    """A named change to the base training configuration."""

    name: str
    aggregation: AggregationMode = AggregationMode.CONCAT
    activation: Activation = Activation.DYRELU
    spectral: bool = True
    autoencoder: bool = False

    def apply(self, train: TrainConfig, weights: LossWeights) -> tuple[TrainConfig, LossWeights]:
        """Return the variant's training configuration and loss weights."""
        spectral = train.spectral if self.spectral else SpectralSchedule.OFF
        if spectral is SpectralSchedule.OFF and self.spectral:
            spectral = SpectralSchedule.POST
        if self.autoencoder:
            # one GCN, reconstruction loss only: no contrast, no fusion, no propagation
            autoencoder = dataclasses.replace(
                train,
                order=1,
                contrastive=False,
                reweight_fusion=False,
                spectral=SpectralSchedule.OFF,
                activation=Activation.RELU,
                aggregation=AggregationMode.SUM,
            )
            return autoencoder, dataclasses.replace(weights, beta=1.0, gamma=0.0)
        variant = dataclasses.replace(
            train, aggregation=self.aggregation, activation=self.activation, spectral=spectral
        )
        return variant, weights


ABLATION_VARIANTS = (
    Variant("sdge-cat"),
    Variant("sdge-sum", aggregation=AggregationMode.SUM),
    Variant("sdge-relu-cat", activation=Activation.RELU),
    Variant("sdge-relu-sum", aggregation=AggregationMode.SUM, activation=Activation.RELU),
    Variant("sdge-cat-no-sp", spectral=False),
    Variant("sdge-sum-no-sp", aggregation=AggregationMode.SUM, spectral=False),
    Variant("gcn-ae", autoencoder=True),
)


@dataclass(frozen=True)
class AblationSuite:
    """Runs every variant through the experiment pipeline on a single loaded graph."""

    config: ExperimentConfig
    provider: DatasetProvider
    variants: tuple[Variant, ...] = ABLATION_VARIANTS

    def run(self) -> dict[str, list[RunOutcome]]:
        """Run all variants, then write the combined aggregate CSV and markdown summary."""
        loader = ExperimentPipeline(self.config, self.provider)
        graph = loader.load_graph()
        results: dict[str, list[RunOutcome]] = {}
        for variant in self.variants:
            train, weights = variant.apply(self.config.train, self.config.weights)
            logger.info("Ablation variant start: name=%s", variant.name)
            config = dataclasses.replace(
                self.config,
                name=variant.name,
                train=train,
                weights=weights,
                output_dir=self.config.output_dir / self.config.name,
            )
            results[variant.name] = ExperimentPipeline(config, self.provider).run(graph)

        rows = [aggregate_outcomes(name, outcomes) for name, outcomes in results.items()]
        output_dir = self.config.output_dir / self.config.name
        write_rows(output_dir / AGGREGATE_FILE_NAME, rows)
        SummaryRenderer(TEMPLATE_DIR, output_dir / SUMMARY_FILE_NAME, SUMMARY_TEMPLATE_NAME).write(
            f"Ablation: {self.config.name}", rows, self._parameters()
        )
        return results

    def _parameters(self) -> dict[str, Any]:
        train = self.config.train
        return {
            "dataset": self.provider.name,
            "seeds": ",".join(str(seed) for seed in self.config.seeds),
            "order": train.order,
            "dims": train.dims,
            "epochs": train.epochs,
            "tau": self.config.weights.tau,
            "beta": self.config.weights.beta,
            "gamma": self.config.weights.gamma,
            "spectral": train.spectral,
            "cheb_order": train.modulator.order,
        }
