"""Componentwise median and resampling minimum volume ellipsoid (MVE) estimation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import stats

from .core import as_samples


class DegeneracyError(np.linalg.LinAlgError):
    """Every candidate ellipsoid was singular."""


@dataclass(frozen=True)
class RobustScatter:
    """Result of :func:`mve_estimate`.

    ``location``/``scatter`` are the reweighted estimates; ``raw_location``
    and ``raw_scatter`` describe the selected minimum-volume ellipsoid
    itself, scaled so that it covers half of the points, and ``volume`` is
    its log-determinant.
    """

    location: np.ndarray
    scatter: np.ndarray
    volume: float
    raw_location: np.ndarray
    raw_scatter: np.ndarray
    n_subsets: int
    n_singular: int
    n_kept: int

    def correlation(self) -> np.ndarray:
        sd = np.sqrt(np.diag(self.scatter))
        corr = self.scatter / np.outer(sd, sd)
        np.fill_diagonal(corr, 1.0)
        return 0.5 * (corr + corr.T)


def componentwise_median(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("median of an empty sample")
    return np.median(as_samples(x), axis=0)


def default_subset_count(p: int) -> int:
    return min(3000, 50 * p * (p + 1))


def _subset_moments(x: np.ndarray, idx: np.ndarray):
    pts = x[idx]  # (b, p+1, p)
    means = pts.mean(axis=1)
    dev = pts - means[:, None, :]
    covs = np.einsum("bki,bkj->bij", dev, dev) / (idx.shape[1] - 1)
    return means, covs


def mve_estimate(rng: np.random.Generator, samples, n_subsets: Optional[int] = None,
                 reweight: bool = True, batch: int = 256) -> RobustScatter:
    """Resampling MVE with a one-step reweighting.

    Random ``(p+1)``-point subsets define candidate ellipsoids; each is
    inflated until it covers ``h = floor((s+p+1)/2)`` points and the one
    with the smallest volume wins. The points it covers give a second
    location/scatter pair, and the final estimate is the mean and covariance
    of all points inside the 97.5% chi-square contour of that pair (the
    contour calibrated by the h-th distance).
    """
    x = as_samples(samples)
    s, p = x.shape
    if s < 2 * (p + 1):
        raise ValueError(f"MVE needs at least {2 * (p + 1)} rows, got {s}")
    n_subsets = default_subset_count(p) if n_subsets is None else int(n_subsets)
    h = (s + p + 1) // 2

    # Subset indices come first so that they depend only on (rng, s, p).
    idx = np.stack([rng.choice(s, p + 1, replace=False) for _ in range(n_subsets)])

    center = np.median(x, axis=0)
    xc = x - center
    quad = np.einsum("ni,nj->nij", xc, xc).reshape(s, p * p)
    chi_half = stats.chi2.ppf(0.5, p)

    best_crit, best = np.inf, None
    n_singular = 0
    for start in range(0, n_subsets, batch):
        means, covs = _subset_moments(xc, idx[start:start + batch])
        eig = np.linalg.eigvalsh(covs)
        ok = (eig[:, 0] > 1e-12 * np.maximum(eig[:, -1], 1e-300)) & (eig[:, -1] > 0)
        n_singular += int(np.count_nonzero(~ok))
        if not ok.any():
            continue
        means, covs, eig = means[ok], covs[ok], eig[ok]
        prec = np.linalg.inv(covs)
        pm = np.einsum("bij,bj->bi", prec, means)
        dist = quad @ prec.reshape(-1, p * p).T - 2.0 * xc @ pm.T + np.einsum("bi,bi->b", pm, means)
        dh = np.partition(dist, h - 1, axis=0)[h - 1]
        crit = np.sum(np.log(eig), axis=1) + p * np.log(np.maximum(dh, 1e-300))
        j = int(np.argmin(crit))
        if crit[j] < best_crit:
            best_crit = crit[j]
            best = (means[j], covs[j], dh[j], dist[:, j] <= dh[j])
    if best is None:
        raise DegeneracyError("all MVE subsets are singular")

    mean, cov, dh, covered = best
    raw_scatter = cov * (dh / chi_half)
    raw_location = mean + center
    volume = float(np.linalg.slogdet(raw_scatter)[1])
    if not reweight:
        return RobustScatter(raw_location, raw_scatter, volume, raw_location, raw_scatter,
                             n_subsets, n_singular, int(np.count_nonzero(covered)))

    half = x[covered]
    m1 = half.mean(axis=0)
    c1 = np.atleast_2d(np.cov(half, rowvar=False))
    if np.linalg.matrix_rank(c1) < p:
        raise DegeneracyError("covered half of the sample is rank deficient")
    d1 = _maha(x, m1, c1)
    cut = stats.chi2.ppf(0.975, p) * np.quantile(d1, h / s) / stats.chi2.ppf(h / s, p)
    kept = x[d1 < cut]
    location = kept.mean(axis=0)
    scatter = np.atleast_2d(np.cov(kept, rowvar=False))
    if np.linalg.matrix_rank(scatter) < p:
        raise DegeneracyError("reweighted scatter is rank deficient")
    return RobustScatter(location, scatter, volume, raw_location, raw_scatter,
                         n_subsets, n_singular, kept.shape[0])


def _maha(x: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> np.ndarray:
    chol = np.linalg.cholesky(cov)
    z = np.linalg.solve(chol, (x - mean).T)
    return np.sum(z * z, axis=0)
