"""Command-line entrypoint: embed, evaluate, generate and ablate."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from clustering.metrics import metric_report
from errors import SdgeError
from graphs.core import (
    build_graph,
    load_edge_list,
    load_labels,
)
from logging_config import setup_logging
from models import (
    Activation,
    AggregationMode,
    DatasetSpec,
    ExperimentConfig,
    LossWeights,
    ModulatorConfig,
    NegativeDistribution,
    Partition,
    SpectralSchedule,
    TrainConfig,
)
from renderers.reports import (
    read_partition,
    write_dataset,
    write_json,
)
from services.ablation import (
    AblationSuite,
    Variant,
)
from services.pipeline import (
    ExperimentPipeline,
    build_provider,
)
from settings import (
    METRICS_FILE_NAME,
    Settings,
    get_settings,
)
from utils import parse_seed_list

logger = logging.getLogger(__name__)

DATASET_CHOICES = ("sbm", "hyperplane", "waveform")


def _add_dataset_arguments(parser: argparse.ArgumentParser, settings: Settings) -> None:
    group = parser.add_argument_group("dataset")
    group.add_argument("--dataset", choices=DATASET_CHOICES, default=settings.dataset, help="synthetic generator")
    group.add_argument("--edges", default=settings.edges, help="edge-list path or URL")
    group.add_argument("--attributes", default=settings.attributes, help="attribute CSV path or URL")
    group.add_argument("--labels", default=settings.labels, help="ground-truth label path or URL")
    group.add_argument("--attributes-header", action="store_true", default=settings.attributes_header)
    group.add_argument("--blocks", type=int, default=settings.blocks)
    group.add_argument("--block-size", type=int, default=settings.block_size)
    group.add_argument("--p-in", type=float, default=settings.p_in)
    group.add_argument("--p-out", type=float, default=settings.p_out)
    group.add_argument("--samples", type=int, default=settings.samples)
    group.add_argument("--features", type=int, default=settings.features)
    group.add_argument("--knn-k", type=int, default=settings.knn_k, help="neighbours of the KNN attribute graph")


def _add_training_arguments(parser: argparse.ArgumentParser, settings: Settings) -> None:
    group = parser.add_argument_group("training")
    group.add_argument("--name", default="sdge", help="experiment name, the output subdirectory")
    group.add_argument("--order", type=int, default=settings.order, help="number of adjacency powers")
    group.add_argument("--dims", type=int, default=settings.dims, help="embedding width")
    group.add_argument("--epochs", type=int, default=settings.epochs)
    group.add_argument("--lr", type=float, default=settings.lr, help="Adam learning rate")
    group.add_argument("--tau", type=float, default=settings.tau, help="contrastive temperature")
    group.add_argument("--beta", type=float, default=settings.beta, help="reconstruction loss weight")
    group.add_argument("--gamma", type=float, default=settings.gamma, help="regularization loss weight")
    group.add_argument("--agg", choices=[mode.value for mode in AggregationMode], default=settings.agg)
    group.add_argument("--negatives", type=int, default=settings.negatives, help="negatives per node")
    group.add_argument(
        "--negative-dist", choices=[kind.value for kind in NegativeDistribution], default=settings.negative_dist
    )
    group.add_argument("--noise-sigma", type=float, default=settings.noise_sigma)
    group.add_argument("--tolerance", type=float, default=settings.tolerance, help="early-stop relative change")
    group.add_argument("--spectral", choices=[kind.value for kind in SpectralSchedule], default=settings.spectral)
    group.add_argument("--cheb-order", type=int, default=settings.cheb_order)
    group.add_argument("--mu", type=float, default=settings.mu, help="modulator centre")
    group.add_argument("--theta", type=float, default=settings.theta, help="modulator width")
    group.add_argument("--seed", default=settings.seed, help="comma-separated seeds")
    group.add_argument("--k", type=int, default=settings.k, help="community count; defaults to the label count")
    group.add_argument("--self-loop-isolated", action="store_true", default=settings.self_loop_isolated)
    group.add_argument("--deterministic", action="store_true", default=settings.deterministic)
    group.add_argument("--binarize-powers", action="store_true", default=settings.binarize_powers)
    group.add_argument("--dense-fallback", action="store_true", default=settings.dense_fallback)
    group.add_argument("--end-to-end", action="store_true", default=settings.end_to_end)
    group.add_argument("--relu", action="store_true", default=settings.relu, help="plain ReLU instead of DyReLU")
    group.add_argument("--no-spectral", action="store_true", default=settings.no_spectral)
    group.add_argument("--gcn-ae", action="store_true", default=settings.gcn_ae, help="GCN autoencoder baseline")
    group.add_argument("--workers", type=int, default=settings.workers, help="parallel seed runs")
    group.add_argument("--save-checkpoint", action="store_true", default=settings.save_checkpoint)


def _add_common_arguments(parser: argparse.ArgumentParser, settings: Settings) -> None:
    parser.add_argument("--output-dir", type=Path, default=settings.output_dir)
    parser.add_argument("--cache-dir", type=Path, default=settings.cache_dir)
    parser.add_argument("--log-level", default=settings.log_level)


def build_parser(settings: Settings | None = None) -> argparse.ArgumentParser:
    """Build the argument parser; every default comes from the `SDGE_`-prefixed settings."""
    settings = settings or get_settings()
    parser = argparse.ArgumentParser(prog="sdge", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    embed = commands.add_parser("embed", help="train, cluster and evaluate one configuration over seeds")
    _add_dataset_arguments(embed, settings)
    _add_training_arguments(embed, settings)
    _add_common_arguments(embed, settings)

    ablate = commands.add_parser("ablate", help="run every ablation variant and write a summary")
    _add_dataset_arguments(ablate, settings)
    _add_training_arguments(ablate, settings)
    _add_common_arguments(ablate, settings)

    evaluate = commands.add_parser("evaluate", help="score an existing partition file")
    evaluate.add_argument("--partition", type=Path, required=True)
    evaluate.add_argument("--labels", type=Path, default=None)
    evaluate.add_argument("--edges", type=Path, default=None, help="edge list for modularity")
    evaluate.add_argument("--output", type=Path, default=None, help="metrics JSON path")
    _add_common_arguments(evaluate, settings)

    generate = commands.add_parser("generate", help="export a synthetic dataset in the loader formats")
    _add_dataset_arguments(generate, settings)
    generate.add_argument("--seed", default=settings.seed)
    _add_common_arguments(generate, settings)
    return parser


def dataset_spec(args: argparse.Namespace) -> DatasetSpec:
    """Return the dataset spec named by the parsed arguments."""
    return DatasetSpec(
        generator=args.dataset,
        edges=args.edges,
        attributes=args.attributes,
        labels=args.labels,
        attributes_header=args.attributes_header,
        blocks=args.blocks,
        block_size=args.block_size,
        p_in=args.p_in,
        p_out=args.p_out,
        samples=args.samples,
        features=args.features,
        knn_k=args.knn_k,
    )


def experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    """Translate parsed arguments into an experiment configuration."""
    seeds = parse_seed_list(args.seed)
    train = TrainConfig(
        epochs=args.epochs,
        order=args.order,
        dims=args.dims,
        k=args.k if args.k is not None else 2,
        learning_rate=args.lr,
        seed=seeds[0],
        aggregation=AggregationMode(args.agg),
        spectral=SpectralSchedule.OFF if args.no_spectral else SpectralSchedule(args.spectral),
        noise_sigma=args.noise_sigma,
        tolerance=args.tolerance,
        negatives=args.negatives,
        negative_distribution=NegativeDistribution(args.negative_dist),
        activation=Activation.RELU if args.relu else Activation.DYRELU,
        end_to_end=args.end_to_end,
        binarize_powers=args.binarize_powers,
        dense_fallback=args.dense_fallback,
        self_loop_isolated=args.self_loop_isolated,
        deterministic=args.deterministic,
        modulator=ModulatorConfig(mu=args.mu, theta=args.theta, order=args.cheb_order),
    )
    weights = LossWeights(beta=args.beta, gamma=args.gamma, tau=args.tau)
    if args.gcn_ae:
        train, weights = Variant("gcn-ae", autoencoder=True).apply(train, weights)
    return ExperimentConfig(
        name=args.name,
        dataset=dataset_spec(args),
        train=train,
        weights=weights,
        seeds=seeds,
        k=args.k,
        output_dir=args.output_dir,
        cache_dir=args.cache_dir,
        save_checkpoint=args.save_checkpoint,
        workers=args.workers,
    )


def run_embed(config: ExperimentConfig) -> None:
    """Train and evaluate one configuration for every seed."""
    provider = build_provider(config.dataset, seed=config.seeds[0], cache_dir=config.cache_dir)
    ExperimentPipeline(config, provider).run()


def run_ablate(config: ExperimentConfig) -> None:
    """Run the ablation variants on one dataset."""
    provider = build_provider(config.dataset, seed=config.seeds[0], cache_dir=config.cache_dir)
    AblationSuite(config, provider).run()


def run_evaluate(args: argparse.Namespace) -> dict[str, float | int | bool]:
    """Score a partition file against labels and, with an edge list, modularity."""
    predicted = read_partition(args.partition)
    truth = Partition.from_labels(load_labels(args.labels)) if args.labels is not None else None
    if args.edges is not None:
        graph = load_edge_list(args.edges, n_hint=predicted.n)
    else:
        graph = build_graph(predicted.n, [], [])
    report = metric_report(graph, predicted, truth)
    output = args.output or args.output_dir / "evaluation" / METRICS_FILE_NAME
    write_json(output, report)
    logger.info("Evaluation result: file=%s %s", output, " ".join(f"{key}={value}" for key, value in report.items()))
    return report


def run_generate(args: argparse.Namespace) -> list[Path]:
    """Write a synthetic dataset as edges.txt, labels.txt and attributes.csv."""
    seed = parse_seed_list(args.seed)[0]
    spec = generator_spec(args)
    provider = build_provider(spec, seed=seed, cache_dir=args.cache_dir)
    return write_dataset(provider.load(), args.output_dir / f"{provider.name}-{seed}")


def generator_spec(args: argparse.Namespace) -> DatasetSpec:
    """Return the generator spec of `generate`, ignoring any file locations."""
    spec = dataset_spec(args)
    if spec.edges is not None or spec.attributes is not None:
        raise ValueError("Configuration error: command=generate flags=--edges,--attributes reason=not_a_generator")
    return spec


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run the chosen command and return the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)

    if args.command in ("embed", "ablate"):
        try:
            config = experiment_config(args)
        except ValueError as exc:
            parser.error(str(exc))

    try:
        match args.command:
            case "embed":
                run_embed(config)
            case "ablate":
                run_ablate(config)
            case "evaluate":
                run_evaluate(args)
            case "generate":
                run_generate(args)
    except (SdgeError, ValueError, OSError) as exc:
        logger.error("Command failed: command=%s error=%s", args.command, exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
