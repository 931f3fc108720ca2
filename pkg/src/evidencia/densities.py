"""Normal, Student t and skew-t densities, samplers and univariate CDF/quantile pairs.

All log densities accept a single point of shape ``(p,)`` or a batch of shape
``(..., p)`` and return a scalar or an array of shape ``(...)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, special

LOG_2PI = np.log(2.0 * np.pi)


class DomainError(ValueError):
    """Probability argument outside the open unit interval."""


class InvalidSkewnessError(ValueError):
    pass


def _cholesky(mat: np.ndarray, what: str = "matrix") -> np.ndarray:
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    if not np.allclose(mat, mat.T, rtol=1e-10, atol=1e-12):
        raise linalg.LinAlgError(f"{what} is not symmetric")
    try:
        return linalg.cholesky(mat, lower=True)
    except linalg.LinAlgError as exc:
        raise linalg.LinAlgError(f"{what} is not positive definite") from exc


def _mahalanobis(x: np.ndarray, mean: np.ndarray, chol: np.ndarray) -> np.ndarray:
    """Squared Mahalanobis distance of each row of ``x`` (shape ``(..., p)``)."""
    diff = np.asarray(x, dtype=float) - mean
    flat = diff.reshape(-1, diff.shape[-1])
    z = linalg.solve_triangular(chol, flat.T, lower=True)
    return np.sum(z * z, axis=0).reshape(diff.shape[:-1])


def _squeeze(value):
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class MvtParams:
    """Location ``mu``, scale matrix ``lam`` and degrees of freedom ``nu``."""

    mu: np.ndarray
    lam: np.ndarray
    nu: float

    def __post_init__(self):
        object.__setattr__(self, "mu", np.atleast_1d(np.asarray(self.mu, dtype=float)))
        object.__setattr__(self, "lam", np.atleast_2d(np.asarray(self.lam, dtype=float)))
        if self.lam.shape != (self.dim, self.dim):
            raise ValueError("scale matrix shape does not match location")
        if not self.nu > 0:
            raise ValueError("degrees of freedom must be positive")

    @property
    def dim(self) -> int:
        return self.mu.shape[0]


@dataclass(frozen=True)
class SkewTParams:
    """Skew-t parameters: location, scale matrix, skewness vector and df."""

    mu: np.ndarray
    lam: np.ndarray
    delta: np.ndarray
    nu: float

    def __post_init__(self):
        object.__setattr__(self, "mu", np.atleast_1d(np.asarray(self.mu, dtype=float)))
        object.__setattr__(self, "lam", np.atleast_2d(np.asarray(self.lam, dtype=float)))
        object.__setattr__(self, "delta", np.atleast_1d(np.asarray(self.delta, dtype=float)))
        k = self.mu.shape[0]
        if self.lam.shape != (k, k) or self.delta.shape != (k,):
            raise ValueError("inconsistent skew-t parameter shapes")
        if not self.nu > 0:
            raise ValueError("degrees of freedom must be positive")
        if self.skew_margin <= 0:
            raise InvalidSkewnessError(
                f"1 - delta' inv(lam) delta = {self.skew_margin:.3g} must be positive"
            )

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @property
    def skew_margin(self) -> float:
        return float(1.0 - self.delta @ linalg.solve(self.lam, self.delta, assume_a="pos"))

    def joint_scale(self) -> np.ndarray:
        """Scale matrix of the latent ``(k+1)``-dimensional t vector ``(X0, X)``."""
        k = self.dim
        out = np.empty((k + 1, k + 1))
        out[0, 0] = 1.0
        out[0, 1:] = self.delta
        out[1:, 0] = self.delta
        out[1:, 1:] = self.lam
        return out


# -- normal ---------------------------------------------------------------

def logpdf_mvn(x, mean, cov):
    """Log density of ``N(mean, cov)`` at ``x``."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    chol = _cholesky(cov, "covariance")
    x = np.asarray(x, dtype=float)
    maha = _mahalanobis(x if x.ndim else x[None], mean, chol)
    p = mean.shape[0]
    half_logdet = np.sum(np.log(np.diag(chol)))
    return _squeeze(-0.5 * (p * LOG_2PI + maha) - half_logdet)


def cdf_normal(x):
    return _squeeze(special.ndtr(x))


def quantile_normal(u):
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)) or np.any(np.isnan(u)):
        raise DomainError("normal quantile needs u in (0, 1)")
    return _squeeze(special.ndtri(u))


# -- Student t ------------------------------------------------------------

def logpdf_t1(x, nu: float):
    """Log density of the standard univariate t with ``nu`` degrees of freedom."""
    x = np.asarray(x, dtype=float)
    out = (special.gammaln(0.5 * (nu + 1)) - special.gammaln(0.5 * nu)
           - 0.5 * np.log(nu * np.pi) - 0.5 * (nu + 1) * np.log1p(x * x / nu))
    return _squeeze(out)


def logpdf_mvt(x, params: MvtParams):
    """Log density of the multivariate t with location/scale/df ``params``."""
    chol = _cholesky(params.lam, "scale matrix")
    x = np.asarray(x, dtype=float)
    maha = _mahalanobis(x if x.ndim else x[None], params.mu, chol)
    p, nu = params.dim, params.nu
    out = (special.gammaln(0.5 * (nu + p)) - special.gammaln(0.5 * nu)
           - 0.5 * p * np.log(nu * np.pi) - np.sum(np.log(np.diag(chol)))
           - 0.5 * (nu + p) * np.log1p(maha / nu))
    return _squeeze(out)


def cdf_t(x, nu: float):
    """Standard t CDF (regularized incomplete beta under the hood)."""
    return _squeeze(special.stdtr(nu, np.asarray(x, dtype=float)))


def log_cdf_t(x, nu: float):
    """``log F(x; nu)`` that stays accurate deep in the lower tail."""
    x = np.asarray(x, dtype=float)
    x2 = x * x
    # tail = P(T > |x|); near zero the central mass is the accurate quantity
    with np.errstate(invalid="ignore", divide="ignore"):
        tail = 0.5 * special.betainc(0.5 * nu, 0.5, nu / (nu + x2))
        central = 0.5 * special.betainc(0.5, 0.5 * nu, x2 / (nu + x2))
        near = x2 < nu
        lower = np.where(near, 0.5 - central, tail)
        upper = np.where(near, 0.5 + central, 1.0 - tail)
        out = np.where(x < 0, np.log(lower), np.where(near, np.log(upper), np.log1p(-tail)))
    return _squeeze(out)


def quantile_t(u, nu: float):
    u = np.asarray(u, dtype=float)
    if np.any((u <= 0) | (u >= 1)) or np.any(np.isnan(u)):
        raise DomainError("t quantile needs u in (0, 1)")
    return _squeeze(special.stdtrit(nu, u))


def sample_mvt(rng: np.random.Generator, n: int, params: MvtParams) -> np.ndarray:
    """Draw ``n`` rows from the multivariate t as a normal / sqrt(chi2 / nu) mixture."""
    chol = _cholesky(params.lam, "scale matrix")
    z = rng.standard_normal((n, params.dim)) @ chol.T
    w = rng.chisquare(params.nu, size=n) / params.nu
    return params.mu + z / np.sqrt(w)[:, None]


# -- skew t ---------------------------------------------------------------

def logpdf_skewt(y, params: SkewTParams):
    """Log density of the multivariate skew-t (t density times a t CDF factor)."""
    y = np.asarray(y, dtype=float)
    k, nu = params.dim, params.nu
    chol = _cholesky(params.lam, "scale matrix")
    diff = (y if y.ndim else y[None]) - params.mu
    flat = diff.reshape(-1, k)
    z = linalg.solve_triangular(chol, flat.T, lower=True)
    maha = np.sum(z * z, axis=0)
    w = linalg.solve_triangular(chol, params.delta, lower=True)
    lin = w @ z  # delta' inv(lam) (y - mu)
    arg = lin / np.sqrt(params.skew_margin) * np.sqrt((nu + k) / (nu + maha))
    log_t = (special.gammaln(0.5 * (nu + k)) - special.gammaln(0.5 * nu)
             - 0.5 * k * np.log(nu * np.pi) - np.sum(np.log(np.diag(chol)))
             - 0.5 * (nu + k) * np.log1p(maha / nu))
    out = np.log(2.0) + log_t + np.asarray(log_cdf_t(arg, nu + k))
    return _squeeze(out.reshape(diff.shape[:-1]))


def sample_skewt(rng: np.random.Generator, n: int, params: SkewTParams) -> np.ndarray:
    """Draw ``n`` skew-t rows.

    The latent ``(X0, X)`` t vector is drawn once per row; rows with
    ``X0 < 0`` are reflected through the location, which by central symmetry
    of the joint t gives an exact draw of ``X | X0 > 0`` with no rejection.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    k = params.dim
    joint = MvtParams(np.zeros(k + 1), params.joint_scale(), params.nu)
    z = sample_mvt(rng, n, joint)
    x = z[:, 1:]
    flip = z[:, 0] < 0
    x[flip] = -x[flip]
    return params.mu + x
