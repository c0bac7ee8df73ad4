"""User-supplied datasets: edge lists, attribute CSVs and label files, local or over http(s)."""

from __future__ import annotations

import logging
from pathlib import Path

from graphs.core import (
    load_attributes,
    load_edge_list,
    load_labels,
)
from graphs.knn import standardize
from models import (
    Graph,
    TabularDataset,
)
from providers.base import DatasetProvider
from providers.tabular import tabular_graph
from settings import REQUEST_TIMEOUT_SECONDS
from utils import (
    cached_path,
    download_file,
    is_remote,
)

logger = logging.getLogger(__name__)


class FileDatasetProvider(DatasetProvider):
    """Loads a graph from files; attributes without edges become a KNN graph."""

    name = "files"

    def __init__(
        self,
        *,
        edges: str | None = None,
        attributes: str | None = None,
        labels: str | None = None,
        attributes_header: bool = False,
        knn_k: int,
        cache_dir: Path,
    ) -> None:
        """Store the file locations; each may be a path or an http(s) URL."""
        if edges is None and attributes is None:
            raise ValueError("Configuration error: flags=--edges,--attributes reason=missing_dataset")
        self.edges = edges
        self.attributes = attributes
        self.labels = labels
        self.attributes_header = attributes_header
        self.knn_k = knn_k
        self.cache_dir = cache_dir

    def _local(self, location: str) -> Path:
        return cached_path(location, self.cache_dir) if is_remote(location) else Path(location)

    def ensure_data(self) -> None:
        """Download remote files into the cache unless already cached."""
        for location in (self.edges, self.attributes, self.labels):
            if location is None or not is_remote(location):
                continue
            destination = self._local(location)
            if destination.exists():
                logger.info("Dataset cache hit: file=%s", destination)
                continue
            destination.parent.mkdir(parents=True, exist_ok=True)
            logger.info("Dataset download: target=%s", destination)
            download_file(
                location,
                destination,
                REQUEST_TIMEOUT_SECONDS,
                error_context=f"Dataset download error: file={destination.name}",
            )

    def load(self) -> Graph:
        """Read the files and assemble the graph."""
        attributes = (
            load_attributes(self._local(self.attributes), header=self.attributes_header)
            if self.attributes is not None
            else None
        )
        labels = load_labels(self._local(self.labels)) if self.labels is not None else None

        if self.edges is None:
            if attributes is None:
                raise ValueError("Configuration error: flags=--edges,--attributes reason=missing_dataset")
            return tabular_graph(TabularDataset(features=attributes, labels=labels), self.knn_k)

        sizes = [len(values) for values in (attributes, labels) if values is not None]
        structure = load_edge_list(self._local(self.edges), n_hint=max(sizes) if sizes else None)
        if attributes is not None:
            attributes = standardize(attributes)
        return Graph(adjacency=structure.adjacency, attributes=attributes, labels=labels)
