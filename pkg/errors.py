"""Exception types raised across the SDGE pipeline."""

from __future__ import annotations


class SdgeError(Exception):
    """Base class for every error the pipeline raises on purpose."""


class GraphFormatError(SdgeError, ValueError):
    """Raised when an edge-list, attribute or label file cannot be parsed."""

    def __init__(self, message: str, *, line: int | None = None) -> None:
        """Store the 1-based offending line, when one exists."""
        super().__init__(message)
        self.line = line


class GraphError(SdgeError, ValueError):
    """Raised for operations a graph cannot support, such as isolated nodes in a random walk."""


class ShapeError(SdgeError, ValueError):
    """Raised when operand shapes do not line up."""


class NumericalError(SdgeError, ArithmeticError):
    """Raised when activations, losses or gradients stop being finite."""


class NoNegativesAvailableError(SdgeError, ValueError):
    """Raised when a node is adjacent to every other node."""


class ClusteringError(SdgeError, ValueError):
    """Raised when points cannot be split into the requested number of clusters."""


class MetricError(SdgeError, ValueError):
    """Raised when a clustering metric is undefined for the given counts."""


class StageError(SdgeError, RuntimeError):
    """Raised by the experiment pipeline, naming the stage that failed."""

    def __init__(self, stage: str, reason: str) -> None:
        """Build the stage-named diagnostic."""
        super().__init__(f"Pipeline error: stage={stage} reason={reason}")
        self.stage = stage
