"""Abstract base class for dataset providers."""

from __future__ import annotations

from abc import (
    ABC,
    abstractmethod,
)

from models import Graph


class DatasetProvider(ABC):
    """Common interface for everything that yields a Graph to embed."""

    name: str

    @abstractmethod
    def ensure_data(self) -> None:
        """Ensure the backing data is available locally."""

    @abstractmethod
    def load(self) -> Graph:
        """Return the graph, with attributes and labels when the source has them."""
