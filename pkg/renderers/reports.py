"""Per-run artifacts: metrics JSON, loss history, embeddings, partitions, timings and aggregates."""

from __future__ import annotations

import csv
import json
import logging
from collections.abc import (
    Mapping,
    Sequence,
)
from pathlib import Path
from typing import Any

import numpy as np

from errors import GraphFormatError
from graphs.core import export_edge_list
from models import (
    EmbeddingMatrix,
    EpochRecord,
    Graph,
    Partition,
)

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ("epoch", "l_s", "l_sa", "l_r", "total")


def _prepare(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_json(path: Path, payload: Mapping[str, Any]) -> None:
    """Write sorted, indented JSON so equal payloads give equal bytes."""
    _prepare(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_history(path: Path, history: Sequence[EpochRecord]) -> None:
    """Write one CSV row per epoch."""
    with _prepare(path).open("w", encoding="utf-8", newline="") as file_obj:
        writer = csv.writer(file_obj)
        writer.writerow(HISTORY_COLUMNS)
        for record in history:
            writer.writerow(
                [record.epoch, record.contrastive, record.reconstruction, record.regularization, record.total]
            )


def read_history(path: Path) -> list[EpochRecord]:
    """Read a loss history written by `write_history`."""
    with path.open(encoding="utf-8", newline="") as file_obj:
        return [
            EpochRecord(
                int(row["epoch"]), float(row["l_s"]), float(row["l_sa"]), float(row["l_r"]), float(row["total"])
            )
            for row in csv.DictReader(file_obj)
        ]


def write_embedding(path: Path, embedding: EmbeddingMatrix) -> None:
    """Write the embedding as CSV, one node per row."""
    np.savetxt(_prepare(path), embedding, delimiter=",", fmt="%.17g")


def write_partition(path: Path, partition: Partition) -> None:
    """Write one community id per line."""
    lines = "".join(f"{community}\n" for community in partition.assignment.tolist())
    _prepare(path).write_text(lines, encoding="utf-8")


def read_partition(path: Path) -> Partition:
    """Read a partition file of one integer per line."""
    try:
        values = np.loadtxt(path, dtype=np.int64, ndmin=1)
    except ValueError as exc:
        raise GraphFormatError(f"Partition parse error: file={path} reason={exc}") from None
    if values.size == 0:
        raise GraphFormatError(f"Partition parse error: file={path} reason=empty")
    return Partition.from_labels(values)


def write_rows(path: Path, rows: Sequence[Mapping[str, Any]]) -> None:
    """Write dictionaries as CSV; columns follow the first row."""
    if not rows:
        raise ValueError(f"Report error: file={path} reason=no_rows")
    with _prepare(path).open("w", encoding="utf-8", newline="") as file_obj:
        writer = csv.DictWriter(file_obj, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    logger.info("Report output: file=%s rows=%d", path, len(rows))


def read_rows(path: Path) -> list[dict[str, str]]:
    """Read a CSV written by `write_rows`."""
    with path.open(encoding="utf-8", newline="") as file_obj:
        return list(csv.DictReader(file_obj))


def write_dataset(graph: Graph, directory: Path) -> list[Path]:
    """Export a graph in the loader formats: edges.txt, labels.txt and attributes.csv when present."""
    directory.mkdir(parents=True, exist_ok=True)
    written = [directory / "edges.txt"]
    export_edge_list(graph, written[0])
    if graph.labels is not None:
        written.append(directory / "labels.txt")
        written[-1].write_text("".join(f"{label}\n" for label in graph.labels.tolist()), encoding="utf-8")
    if graph.attributes is not None:
        written.append(directory / "attributes.csv")
        np.savetxt(written[-1], graph.attributes, delimiter=",", fmt="%.17g")
    logger.info("Dataset export: directory=%s files=%s", directory, ",".join(path.name for path in written))
    return written
