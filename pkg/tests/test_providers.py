from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from errors import GraphError
from models import TabularKind
from providers.files import FileDatasetProvider
from providers.sbm import (
    SbmProvider,
    generate_sbm,
)
from providers.tabular import (
    TabularProvider,
    generate_tabular,
)
from utils import cached_path


def write_lines(path: Path, lines: list[str]) -> Path:
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
    return path


def test_sbm_with_certain_blocks_gives_disjoint_cliques() -> None:
    graph = generate_sbm(3, 4, 1.0, 0.0, seed=1)

    dense = graph.adjacency.toarray()

    blocks = np.repeat(np.arange(3), 4)
    expected = (blocks[:, None] == blocks[None, :]).astype(float) - np.eye(12)
    assert np.array_equal(dense, expected)
    assert np.array_equal(graph.labels, blocks)


def test_sbm_edge_count_is_near_its_expectation() -> None:
    within, across = 4 * 1225, 19900 - 4 * 1225
    expected = within * 0.3 + across * 0.02
    sigma = np.sqrt(within * 0.3 * 0.7 + across * 0.02 * 0.98)

    graph = generate_sbm(4, 50, 0.3, 0.02, seed=7)

    assert expected == pytest.approx(1770.0)
    assert abs(graph.edge_count - expected) < 4 * sigma


def test_sbm_is_deterministic_for_a_fixed_seed() -> None:
    first = generate_sbm(3, 10, 0.5, 0.05, seed=11)
    second = generate_sbm(3, 10, 0.5, 0.05, seed=11)

    assert (first.adjacency != second.adjacency).nnz == 0


@pytest.mark.parametrize(("p_in", "p_out"), [(0.1, 0.2), (1.5, 0.0), (0.5, -0.1)])
def test_sbm_rejects_invalid_probabilities(p_in: float, p_out: float) -> None:
    with pytest.raises(GraphError, match="invalid_probabilities"):
        generate_sbm(2, 5, p_in, p_out, seed=1)


def test_sbm_provider_loads_the_generated_graph() -> None:
    provider = SbmProvider(2, 8, 0.8, 0.05, seed=3)

    provider.ensure_data()
    graph = provider.load()

    assert provider.name == "sbm"
    assert graph.n == 16
    assert graph.attributes is None


def test_hyperplane_labels_follow_the_threshold() -> None:
    dataset = generate_tabular(TabularKind.HYPERPLANE, 300, 4, seed=2, coefficients=[1.0, 0.0, 0.0, 0.0], threshold=0.5)

    assert dataset.features.shape == (300, 4)
    assert np.array_equal(dataset.labels, (dataset.features[:, 0] >= 0.5).astype(np.int64))


def test_hyperplane_rejects_mismatched_coefficients() -> None:
    with pytest.raises(ValueError, match="shape_mismatch"):
        generate_tabular(TabularKind.HYPERPLANE, 10, 3, seed=1, coefficients=[1.0, 2.0])


def test_waveform_draws_three_classes() -> None:
    dataset = generate_tabular(TabularKind.WAVEFORM, 300, 21, seed=4)

    assert dataset.features.shape == (300, 21)
    assert set(np.unique(dataset.labels).tolist()) == {0, 1, 2}


def test_tabular_provider_builds_a_labeled_knn_graph() -> None:
    provider = TabularProvider(TabularKind.WAVEFORM, samples=60, features=21, knn_k=5, seed=1)

    graph = provider.load()

    assert provider.name == "waveform"
    assert graph.n == 60
    assert graph.isolated_nodes().size == 0
    assert graph.labels is not None and graph.labels.size == 60


def test_file_provider_requires_edges_or_attributes(tmp_path: Path) -> None:
    with pytest.raises(ValueError, match="missing_dataset"):
        FileDatasetProvider(labels="labels.txt", knn_k=5, cache_dir=tmp_path)


def test_file_provider_loads_edges_attributes_and_labels(tmp_path: Path) -> None:
    edges = write_lines(tmp_path / "edges.txt", ["# toy", "0 1", "1 2", "2 0"])
    attributes = write_lines(tmp_path / "attributes.csv", ["1,10", "2,20", "3,30", "4,40"])
    labels = write_lines(tmp_path / "labels.txt", ["0", "0", "0", "1"])
    provider = FileDatasetProvider(
        edges=str(edges), attributes=str(attributes), labels=str(labels), knn_k=2, cache_dir=tmp_path
    )

    provider.ensure_data()
    graph = provider.load()

    assert graph.n == 4
    assert graph.edge_count == 3
    assert graph.isolated_nodes().tolist() == [3]
    assert graph.attributes is not None
    np.testing.assert_allclose(graph.attributes.mean(axis=0), 0.0, atol=1e-12)
    assert graph.labels is not None
    assert graph.labels.tolist() == [0, 0, 0, 1]


def test_file_provider_builds_knn_graph_from_attributes_only(tmp_path: Path) -> None:
    rows = [f"{value},{value * 2}" for value in range(10)]
    attributes = write_lines(tmp_path / "attributes.csv", ["x,y", *rows])
    provider = FileDatasetProvider(attributes=str(attributes), attributes_header=True, knn_k=3, cache_dir=tmp_path)

    graph = provider.load()

    assert graph.n == 10
    assert graph.edge_count > 0


def test_file_provider_downloads_remote_files_once(monkeypatch: pytest.MonkeyPatch, tmp_path: Path) -> None:
    url = "https://example.invalid/data/edges.txt"
    calls: list[str] = []

    def fake_download(location: str, destination: Path, timeout: int, *, error_context: str) -> None:
        calls.append(location)
        destination.write_text("0 1\n1 2\n", encoding="utf-8")

    monkeypatch.setattr("providers.files.download_file", fake_download)
    provider = FileDatasetProvider(edges=url, knn_k=2, cache_dir=tmp_path / "cache")

    provider.ensure_data()
    provider.ensure_data()
    graph = provider.load()

    assert calls == [url]
    assert cached_path(url, tmp_path / "cache").exists()
    assert graph.edge_count == 2
