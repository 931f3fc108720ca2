"""Tabulated one-dimensional distributions.

A :class:`GridDistribution` is the distribution whose density is the linear
interpolant of tabulated values. Its CDF is then piecewise quadratic and can
be inverted in closed form, so density, CDF and sampler agree exactly, which
bridge sampling relies on.
"""
from __future__ import annotations

import numpy as np

from .densities import DomainError


def log_to_density(log_values: np.ndarray) -> np.ndarray:
    """Exponentiate log values after subtracting their maximum."""
    log_values = np.asarray(log_values, dtype=float)
    return np.exp(log_values - np.max(log_values))


class GridDistribution:
    def __init__(self, nodes, density):
        x = np.asarray(nodes, dtype=float)
        f = np.asarray(density, dtype=float)
        if x.ndim != 1 or x.shape != f.shape or x.size < 2:
            raise ValueError("need matching 1-D node and density arrays")
        if np.any(np.diff(x) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise ValueError("density values must be finite and non-negative")
        widths = np.diff(x)
        cell_mass = 0.5 * widths * (f[:-1] + f[1:])
        total = cell_mass.sum()
        if total <= 0:
            raise ValueError("density has zero mass on the grid")
        self.nodes = x
        self.density = f / total
        self._widths = widths
        cdf = np.concatenate([[0.0], np.cumsum(cell_mass / total)])
        cdf[-1] = 1.0
        self.cdf_table = cdf
        self._slopes = np.diff(self.density) / widths
        self.median = float(self.ppf(0.5))

    @property
    def lower(self) -> float:
        return float(self.nodes[0])

    @property
    def upper(self) -> float:
        return float(self.nodes[-1])

    def pdf(self, t):
        return np.interp(t, self.nodes, self.density, left=0.0, right=0.0)

    def logpdf(self, t):
        with np.errstate(divide="ignore"):
            return np.log(self.pdf(t))

    point_logpdf = logpdf

    def _cell(self, t):
        i = np.searchsorted(self.nodes, t, side="right") - 1
        return np.clip(i, 0, self.nodes.size - 2)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        i = self._cell(t)
        u = np.clip(t - self.nodes[i], 0.0, self._widths[i])
        out = self.cdf_table[i] + self.density[i] * u + 0.5 * self._slopes[i] * u * u
        out = np.where(t <= self.nodes[0], 0.0, np.where(t >= self.nodes[-1], 1.0, out))
        return np.clip(out, 0.0, 1.0)[()]

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        if np.any((q < 0) | (q > 1)) or np.any(np.isnan(q)):
            raise DomainError("grid quantile needs q in [0, 1]")
        i = np.searchsorted(self.cdf_table, q, side="right") - 1
        i = np.clip(i, 0, self.nodes.size - 2)
        r = q - self.cdf_table[i]
        f0, a = self.density[i], self._slopes[i]
        disc = np.sqrt(np.maximum(f0 * f0 + 2.0 * a * r, 0.0))
        denom = f0 + disc
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(denom > 0, 2.0 * r / denom, 0.0)
        return np.minimum(self.nodes[i] + np.clip(u, 0.0, self._widths[i]), self.nodes[-1])[()]

    def expectation(self, func=None) -> float:
        """Trapezoid approximation of ``E[func(X)]`` on the grid nodes."""
        values = self.density if func is None else np.asarray(func(self.nodes)) * self.density
        return float(np.trapezoid(values, self.nodes))

    def mean(self) -> float:
        return self.expectation(lambda t: t)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.ppf(rng.random(n))
