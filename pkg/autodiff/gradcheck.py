"""Compare reverse-mode gradients against central finite differences."""

from __future__ import annotations

import logging
from collections.abc import (
    Callable,
    Sequence,
)
from dataclasses import dataclass

import numpy as np

from autodiff.tape import (
    Node,
    Parameter,
    Tape,
    backward,
)
from errors import NumericalError

logger = logging.getLogger(__name__)

type LossBuilder = Callable[[Tape], Node]


@dataclass(frozen=True)
class GradientReport:
    """Worst disagreement between analytic and numeric gradients."""

    max_relative_error: float
    worst_parameter: str
    worst_index: tuple[int, ...]
    checked_entries: int
    tolerance: float

    @property
    def passed(self) -> bool:
        """Return whether every entry was within tolerance."""
        return self.max_relative_error < self.tolerance


def evaluate(build: LossBuilder) -> float:
    """Build the loss on a fresh tape and return its scalar value."""
    tape = Tape()
    value = float(np.asarray(build(tape).value).reshape(-1)[0])
    if not np.isfinite(value):
        raise NumericalError(f"Gradient check error: value={value} reason=non_finite_loss")
    return value


def gradient_check(
    build: LossBuilder,
    parameters: Sequence[Parameter],
    *,
    step: float = 1e-5,
    tolerance: float = 1e-4,
    floor: float = 1e-6,
) -> GradientReport:
    """Check every entry of `parameters`; `build` must be deterministic.

    Relative error is |analytic − numeric| / max(|analytic|, |numeric|, floor).
    """
    for parameter in parameters:
        parameter.zero_grad()
    tape = Tape()
    loss = build(tape)
    backward(tape, loss)
    analytic = [parameter.grad.copy() for parameter in parameters]

    worst = 0.0
    worst_parameter = ""
    worst_index: tuple[int, ...] = ()
    checked = 0
    for parameter, grad in zip(parameters, analytic, strict=True):
        if not np.all(np.isfinite(grad)):
            raise NumericalError(f"Gradient check error: parameter={parameter.name} reason=non_finite_grad")
        for index in np.ndindex(parameter.value.shape):
            original = parameter.value[index]
            parameter.value[index] = original + step
            upper = evaluate(build)
            parameter.value[index] = original - step
            lower = evaluate(build)
            parameter.value[index] = original
            numeric = (upper - lower) / (2.0 * step)
            error = abs(grad[index] - numeric) / max(abs(grad[index]), abs(numeric), floor)
            checked += 1
            if error > worst:
                worst, worst_parameter, worst_index = error, parameter.name, tuple(int(i) for i in index)

    report = GradientReport(worst, worst_parameter, worst_index, checked, tolerance)
    logger.debug(
        "Gradient check result: entries=%d max_relative_error=%.3e parameter=%s passed=%s",
        checked,
        worst,
        worst_parameter,
        report.passed,
    )
    return report
