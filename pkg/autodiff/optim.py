"""Adam optimizer over named parameters."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from autodiff.tape import Parameter
from errors import NumericalError
from models import DenseMatrix
from settings import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPSILON,
    ADAM_LEARNING_RATE,
)

logger = logging.getLogger(__name__)


class Adam:
    """Adam with bias-corrected first and second moment estimates."""

    def __init__(
        self,
        parameters: Sequence[Parameter],
        *,
        learning_rate: float = ADAM_LEARNING_RATE,
        beta1: float = ADAM_BETA1,
        beta2: float = ADAM_BETA2,
        epsilon: float = ADAM_EPSILON,
    ) -> None:
        """Track one moment pair per parameter."""
        if learning_rate <= 0:
            raise ValueError(f"Optimizer error: learning_rate={learning_rate} reason=not_positive")
        self.parameters = list(parameters)
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.steps = 0
        self._first: list[DenseMatrix] = [np.zeros_like(parameter.value) for parameter in self.parameters]
        self._second: list[DenseMatrix] = [np.zeros_like(parameter.value) for parameter in self.parameters]

    def zero_grad(self) -> None:
        """Clear every tracked gradient."""
        for parameter in self.parameters:
            parameter.zero_grad()

    def step(self) -> None:
        """Apply one update from the accumulated gradients; a non-finite gradient leaves every parameter untouched."""
        for parameter in self.parameters:
            if not np.all(np.isfinite(parameter.grad)):
                raise NumericalError(
                    f"Optimizer error: parameter={parameter.name} step={self.steps + 1} reason=non_finite_grad"
                )
        self.steps += 1
        correction1 = 1.0 - self.beta1**self.steps
        correction2 = 1.0 - self.beta2**self.steps
        for parameter, first, second in zip(self.parameters, self._first, self._second, strict=True):
            grad = parameter.grad
            first *= self.beta1
            first += (1.0 - self.beta1) * grad
            second *= self.beta2
            second += (1.0 - self.beta2) * grad * grad
            update = (first / correction1) / (np.sqrt(second / correction2) + self.epsilon)
            parameter.value -= self.learning_rate * update
