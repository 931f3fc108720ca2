"""Shared containers: target models and log marginal likelihood estimates."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

LogDensity = Callable[[np.ndarray], np.ndarray]
Sampler = Callable[[np.random.Generator, int], np.ndarray]


class EstimationError(RuntimeError):
    """Raised when an estimator cannot produce a value."""


@dataclass(frozen=True)
class TargetModel:
    """An unnormalized log density ``g(theta) = log p(theta) + log p(y | theta)``.

    ``log_unnorm`` is vectorized: it maps an ``(..., dim)`` array to an
    ``(...)`` array of log density values.
    """

    dim: int
    log_unnorm: LogDensity
    sampler: Optional[Sampler] = None
    true_log_z: Optional[float] = None
    name: str = "target"
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")

    def __call__(self, theta) -> np.ndarray:
        return self.log_unnorm(np.asarray(theta, dtype=float))

    def starting_point(self) -> np.ndarray:
        if self.x0 is None:
            return np.zeros(self.dim)
        return np.asarray(self.x0, dtype=float)


@dataclass
class LogMlEstimate:
    method: str
    log_ml: float
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.log_ml)


def as_samples(samples, dim: Optional[int] = None) -> np.ndarray:
    """Coerce draws to a 2-D float array of shape ``(s, p)``."""
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValueError("samples must be a non-empty (s, p) matrix")
    if dim is not None and x.shape[1] != dim:
        raise ValueError(f"samples have {x.shape[1]} columns, expected {dim}")
    return x
