"""Experiment assembly: dataset providers, per-seed training jobs and aggregated reports."""

from __future__ import annotations

import dataclasses
import logging
import statistics
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from clustering.metrics import metric_report
from errors import (
    SdgeError,
    StageError,
)
from model.checkpoint import save_checkpoint
from models import (
    DatasetSpec,
    ExperimentConfig,
    Graph,
    LossWeights,
    Partition,
    TabularKind,
    TrainConfig,
)
from providers.base import DatasetProvider
from providers.files import FileDatasetProvider
from providers.sbm import SbmProvider
from providers.tabular import TabularProvider
from renderers.reports import (
    write_embedding,
    write_history,
    write_json,
    write_partition,
    write_rows,
)
from settings import (
    AGGREGATE_FILE_NAME,
    CHECKPOINT_FILE_NAME,
    EMBEDDING_FILE_NAME,
    HISTORY_FILE_NAME,
    METRICS_FILE_NAME,
    PARTITION_FILE_NAME,
    TIMING_FILE_NAME,
)
from training.trainer import fit
from utils import (
    StageTimer,
    fingerprint,
)

logger = logging.getLogger(__name__)

METRIC_KEYS = ("jaccard", "fm", "f1", "kulczynski", "modularity")
TIMING_KEYS = ("training", "spectral", "total")


def build_provider(spec: DatasetSpec, *, seed: int, cache_dir: Path) -> DatasetProvider:
    """Return the provider for a dataset spec; file locations win over generators."""
    if spec.edges is not None or spec.attributes is not None:
        return FileDatasetProvider(
            edges=spec.edges,
            attributes=spec.attributes,
            labels=spec.labels,
            attributes_header=spec.attributes_header,
            knn_k=spec.knn_k,
            cache_dir=cache_dir,
        )
    if spec.generator == "sbm":
        return SbmProvider(spec.blocks, spec.block_size, spec.p_in, spec.p_out, seed)
    try:
        kind = TabularKind(spec.generator)
    except ValueError:
        raise ValueError(f"Configuration error: dataset={spec.generator} reason=unknown_generator") from None
    return TabularProvider(kind, spec.samples, spec.features, spec.knn_k, seed)


def resolve_k(graph: Graph, k: int | None) -> int:
    """Return the explicit community count or the number of distinct labels."""
    if k is not None:
        return k
    if graph.labels is None:
        raise StageError("config", "k_missing hint=--k_or_--labels")
    return Partition.from_labels(graph.labels).k


def config_payload(train: TrainConfig, weights: LossWeights) -> dict[str, Any]:
    """Return the JSON-ready training configuration of one run."""
    return {"train": dataclasses.asdict(train), "weights": dataclasses.asdict(weights)}


@dataclass(frozen=True)
class RunOutcome:
    """Metrics and timings of one finished run."""

    name: str
    seed: int
    run_dir: Path
    metrics: dict[str, Any]
    timings: dict[str, float]


@dataclass(frozen=True)
class RunJob:
    """One training run for one seed, writing its own directory of artifacts."""

    name: str
    graph: Graph
    train: TrainConfig
    weights: LossWeights
    run_dir: Path
    save_checkpoint: bool = False

    def run(self) -> RunOutcome:
        """Fit, evaluate and write metrics, history, embedding, partition and timing files."""
        seed = self.train.seed
        logger.info("Run job start: name=%s seed=%d dir=%s", self.name, seed, self.run_dir)
        timer = StageTimer()
        with timer.stage("total"):
            try:
                result = fit(self.graph, self.train, self.weights, timer=timer)
            except SdgeError as exc:
                raise StageError("training", f"{exc} name={self.name} seed={seed}") from exc

            with timer.stage("evaluation"):
                truth = Partition.from_labels(self.graph.labels) if self.graph.labels is not None else None
                try:
                    report = metric_report(self.graph, result.partition, truth)
                except SdgeError as exc:
                    raise StageError("evaluation", f"{exc} name={self.name} seed={seed}") from exc

            metrics: dict[str, Any] = {
                "name": self.name,
                "seed": seed,
                "nodes": self.graph.n,
                "edges": self.graph.edge_count,
                "epochs_run": result.epochs_run,
                "converged": result.converged,
                "initial_total": result.history[0].total if result.history else None,
                "final_total": result.history[-1].total if result.history else None,
                "fusion_weights": list(result.fusion_weights),
                "config_fingerprint": fingerprint(config_payload(self.train, self.weights)),
                **report,
            }
            if metrics["degenerate"]:
                logger.warning(
                    "Degenerate partition: name=%s seed=%d k=%d k_effective=1", self.name, seed, self.train.k
                )

            with timer.stage("reporting"):
                write_json(self.run_dir / METRICS_FILE_NAME, metrics)
                write_history(self.run_dir / HISTORY_FILE_NAME, result.history)
                write_embedding(self.run_dir / EMBEDDING_FILE_NAME, result.enhanced)
                write_partition(self.run_dir / PARTITION_FILE_NAME, result.partition)
                if self.save_checkpoint:
                    metadata = {"name": self.name, "seed": seed}
                    save_checkpoint(result.model, self.run_dir / CHECKPOINT_FILE_NAME, metadata)

        timings = dict(sorted(timer.seconds.items()))
        write_json(self.run_dir / TIMING_FILE_NAME, timings)
        logger.info(
            "Run result: name=%s seed=%d f1=%s modularity=%s seconds=%.2f",
            self.name,
            seed,
            _format_optional(metrics.get("f1")),
            _format_optional(metrics.get("modularity")),
            timings["total"],
        )
        return RunOutcome(self.name, seed, self.run_dir, metrics, timings)


def _format_optional(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def aggregate_outcomes(name: str, outcomes: Sequence[RunOutcome]) -> dict[str, Any]:
    """Summarize a variant across seeds by the median and spread (max − min) of each metric."""
    row: dict[str, Any] = {"name": name, "runs": len(outcomes), "seeds": " ".join(str(o.seed) for o in outcomes)}
    for key in METRIC_KEYS:
        values = [float(o.metrics[key]) for o in outcomes if o.metrics.get(key) is not None]
        if values:
            row[f"{key}_median"] = statistics.median(values)
            row[f"{key}_spread"] = max(values) - min(values)
    row["degenerate_runs"] = sum(1 for o in outcomes if o.metrics.get("degenerate"))
    for key in TIMING_KEYS:
        row[f"{key}_seconds_median"] = statistics.median(o.timings.get(key, 0.0) for o in outcomes)
    return row


@dataclass(frozen=True)
class ExperimentPipeline:
    """Loads the dataset once and runs one job per seed."""

    config: ExperimentConfig
    provider: DatasetProvider

    def load_graph(self) -> Graph:
        """Fetch and load the dataset, naming the data stage on failure."""
        try:
            self.provider.ensure_data()
            graph = self.provider.load()
        except (SdgeError, ValueError, RuntimeError, OSError) as exc:
            raise StageError("data", f"{exc} provider={self.provider.name}") from exc
        logger.info(
            "Dataset loaded: provider=%s nodes=%d edges=%d attributes=%s labels=%s",
            self.provider.name,
            graph.n,
            graph.edge_count,
            graph.attributes.shape[1] if graph.attributes is not None else 0,
            graph.labels is not None,
        )
        return graph

    def jobs(self, graph: Graph) -> list[RunJob]:
        """Return one job per configured seed."""
        k = resolve_k(graph, self.config.k)
        return [
            RunJob(
                name=self.config.name,
                graph=graph,
                train=dataclasses.replace(self.config.train, seed=seed, k=k),
                weights=self.config.weights,
                run_dir=self.config.output_dir / self.config.name / f"seed-{seed}",
                save_checkpoint=self.config.save_checkpoint,
            )
            for seed in self.config.seeds
        ]

    def run(self, graph: Graph | None = None) -> list[RunOutcome]:
        """Run every seed, then write the aggregate CSV of the experiment."""
        graph = graph if graph is not None else self.load_graph()
        jobs = self.jobs(graph)
        workers = 1 if self.config.train.deterministic else max(1, min(self.config.workers, len(jobs)))
        if workers == 1:
            outcomes = [job.run() for job in jobs]
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                outcomes = list(executor.map(RunJob.run, jobs))

        aggregate = aggregate_outcomes(self.config.name, outcomes)
        write_rows(self.config.output_dir / self.config.name / AGGREGATE_FILE_NAME, [aggregate])
        logger.info("Experiment complete: name=%s runs=%d", self.config.name, len(outcomes))
        return outcomes
