from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from errors import GraphFormatError
from graphs.core import (
    build_graph,
    load_attributes,
    load_edge_list,
    load_labels,
)
from models import (
    EpochRecord,
    Partition,
)
from renderers.reports import (
    read_history,
    read_partition,
    read_rows,
    write_dataset,
    write_embedding,
    write_history,
    write_json,
    write_partition,
    write_rows,
)
from renderers.summary import SummaryRenderer
from settings import (
    SUMMARY_TEMPLATE_NAME,
    TEMPLATE_DIR,
)


def summary_row(name: str, degenerate_runs: int = 0) -> dict[str, object]:
    return {
        "name": name,
        "runs": 3,
        "f1_median": 0.5,
        "f1_spread": 0.125,
        "modularity_median": 0.25,
        "modularity_spread": 0.0,
        "degenerate_runs": degenerate_runs,
        "training_seconds_median": 1.5,
        "spectral_seconds_median": 0.25,
    }


def test_write_json_is_sorted_and_stable(tmp_path: Path) -> None:
    path = tmp_path / "nested" / "metrics.json"

    write_json(path, {"b": 1, "a": [1.5, None]})

    assert path.read_text(encoding="utf-8") == '{\n  "a": [\n    1.5,\n    null\n  ],\n  "b": 1\n}\n'
    assert json.loads(path.read_text(encoding="utf-8")) == {"a": [1.5, None], "b": 1}


def test_history_is_read_back_unchanged(tmp_path: Path) -> None:
    history = [EpochRecord(0, 2.5, 1.25, 0.125, 3.0), EpochRecord(1, 2.0, 1.0, 0.1, 2.5)]
    path = tmp_path / "history.csv"

    write_history(path, history)

    assert path.read_text(encoding="utf-8").splitlines()[0] == "epoch,l_s,l_sa,l_r,total"
    assert read_history(path) == history


def test_partition_file_is_one_id_per_line(tmp_path: Path) -> None:
    path = tmp_path / "partition.txt"

    write_partition(path, Partition(np.array([1, 0, 1], dtype=np.int64), 2))

    assert path.read_text(encoding="utf-8") == "1\n0\n1\n"
    assert read_partition(path).assignment.tolist() == [1, 0, 1]


def test_read_partition_relabels_arbitrary_ids(tmp_path: Path) -> None:
    path = tmp_path / "partition.txt"
    path.write_text("7\n3\n7\n", encoding="utf-8")

    predicted = read_partition(path)

    assert predicted.assignment.tolist() == [1, 0, 1]
    assert predicted.k == 2


def test_read_partition_rejects_garbage(tmp_path: Path) -> None:
    path = tmp_path / "partition.txt"
    path.write_text("a\nb\n", encoding="utf-8")

    with pytest.raises(GraphFormatError, match="Partition parse error"):
        read_partition(path)


def test_embedding_is_written_at_full_precision(tmp_path: Path) -> None:
    embedding = np.array([[0.1, 1.0 / 3.0], [2.0, -5e-20]])
    path = tmp_path / "embedding.csv"

    write_embedding(path, embedding)

    assert np.array_equal(np.loadtxt(path, delimiter=","), embedding)


def test_rows_round_trip_as_strings(tmp_path: Path) -> None:
    path = tmp_path / "aggregate.csv"

    write_rows(path, [{"name": "sdge-cat", "runs": 2}, {"name": "gcn-ae", "runs": 1}])

    assert read_rows(path) == [{"name": "sdge-cat", "runs": "2"}, {"name": "gcn-ae", "runs": "1"}]


def test_write_rows_rejects_empty_input(tmp_path: Path) -> None:
    with pytest.raises(ValueError, match="no_rows"):
        write_rows(tmp_path / "aggregate.csv", [])


def test_dataset_export_is_readable_by_the_loaders(tmp_path: Path) -> None:
    graph = build_graph(
        4,
        [0, 1, 2],
        [1, 2, 3],
        attributes=np.array([[0.5, 1.0], [1.5, 2.0], [2.5, 3.0], [3.5, 4.0]]),
        labels=np.array([0, 0, 1, 1], dtype=np.int64),
    )

    written = write_dataset(graph, tmp_path / "toy")

    assert [path.name for path in written] == ["edges.txt", "labels.txt", "attributes.csv"]
    assert (load_edge_list(written[0]).adjacency != graph.adjacency).nnz == 0
    assert load_labels(written[1]).tolist() == [0, 0, 1, 1]
    assert np.array_equal(load_attributes(written[2]), graph.attributes)


def test_summary_renderer_writes_metric_columns(tmp_path: Path) -> None:
    output = tmp_path / "summary.md"
    renderer = SummaryRenderer(TEMPLATE_DIR, output, SUMMARY_TEMPLATE_NAME)

    renderer.write("Ablation: toy", [summary_row("sdge-cat"), summary_row("gcn-ae", degenerate_runs=1)], {"tau": 0.5})

    text = output.read_text(encoding="utf-8")
    assert text.startswith("# Ablation: toy\n")
    assert "| variant | runs | f1 (median ± spread) | modularity (median ± spread) | training s | spectral s |" in text
    assert "| sdge-cat | 3 | 0.5000 ± 0.1250 | 0.2500 ± 0.0000 | 1.50 | 0.25 |" in text
    assert "Degenerate partitions (a single predicted community) occurred in: gcn-ae." in text
    assert "- `tau`: 0.5" in text
