"""Bridge sampling with the Meng-Wong optimal bridge function, evaluated in log space."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import logsumexp

from .copula import (CopulaFit, copula_logml, fit_gaussian_copula_sim, gaussian_copula_logpdf,
                     sample_gaussian_copula)
from .core import EstimationError, TargetModel, as_samples
from .densities import logpdf_mvn
from .laplace import ModeSummary, laplace_logml

ITER_TOL = 1e-4


class OverlapError(EstimationError):
    """The proposal puts no mass where the target does."""


@dataclass(frozen=True)
class BridgeProposal:
    """A normalized proposal density ``log_density`` with a matching sampler ``draw(rng, n)``."""

    log_density: Callable[[np.ndarray], np.ndarray]
    draw: Callable[[np.random.Generator, int], np.ndarray]
    name: str = "proposal"


@dataclass
class BridgeEstimate:
    log_ml: float
    numerator_ess: float
    denominator_ess: float
    t_anchor: float
    method: str = "bridge"
    n_iter: int = 1
    diagnostics: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return float(self.log_ml)


def _finite_or_neg_inf(values) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    return np.where(np.isnan(values), -np.inf, values)


def _ess(log_w: np.ndarray) -> float:
    log_w = log_w[np.isfinite(log_w)]
    if log_w.size == 0:
        return 0.0
    return float(np.exp(2 * logsumexp(log_w) - logsumexp(2 * log_w)))


@dataclass(frozen=True)
class _BridgeTerms:
    """Log densities of both draw sets under the target and the proposal."""

    g_post: np.ndarray
    r_post: np.ndarray
    g_prop: np.ndarray
    r_prop: np.ndarray

    def estimate(self, anchor: float) -> tuple[float, float, float]:
        s, big_s = self.g_post.size, self.g_prop.size
        log_s, log_big_s = np.log(s), np.log(big_s)

        def log_t(g, r):
            return -np.logaddexp(log_s + g - anchor, log_big_s + r)

        num_terms = log_t(self.g_prop, self.r_prop) + self.g_prop
        den_terms = log_t(self.g_post, self.r_post) + self.r_post
        if not np.any(np.isfinite(num_terms)):
            raise OverlapError("proposal draws all have zero target density")
        if not np.any(np.isfinite(den_terms)):
            raise OverlapError("posterior draws all have zero proposal density")
        value = (logsumexp(num_terms) - log_big_s) - (logsumexp(den_terms) - log_s)
        return float(value), _ess(num_terms), _ess(den_terms)


def _terms(target: TargetModel, posterior: np.ndarray, proposal: BridgeProposal,
           rng: np.random.Generator, n_prop: int) -> _BridgeTerms:
    draws = as_samples(proposal.draw(rng, n_prop), target.dim)
    return _BridgeTerms(
        g_post=_finite_or_neg_inf(target.log_unnorm(posterior)),
        r_post=_finite_or_neg_inf(proposal.log_density(posterior)),
        g_prop=_finite_or_neg_inf(target.log_unnorm(draws)),
        r_prop=_finite_or_neg_inf(proposal.log_density(draws)),
    )


def _check_sizes(posterior: np.ndarray, n_prop: int):
    if posterior.shape[0] < 100 or n_prop < 100:
        raise ValueError("bridge sampling needs at least 100 draws on each side")


def bridge_logml(target: TargetModel, posterior_samples, proposal: BridgeProposal,
                 rng: np.random.Generator, S: Optional[int] = None,
                 anchor_log_ml: float = 0.0) -> BridgeEstimate:
    """Single-pass bridge estimate with the optimal ``t`` built around ``anchor_log_ml``."""
    posterior = as_samples(posterior_samples, target.dim)
    n_prop = posterior.shape[0] if S is None else int(S)
    _check_sizes(posterior, n_prop)
    if not np.isfinite(anchor_log_ml):
        raise ValueError("anchor must be finite")
    terms = _terms(target, posterior, proposal, rng, n_prop)
    value, num_ess, den_ess = terms.estimate(anchor_log_ml)
    return BridgeEstimate(value, num_ess, den_ess, float(anchor_log_ml), diagnostics={"proposal": proposal.name})


def iterative_bridge(target: TargetModel, posterior_samples, proposal: BridgeProposal,
                     rng: np.random.Generator, S: Optional[int] = None,
                     initial_anchor: float = 0.0, max_iter: int = 50) -> BridgeEstimate:
    """Refine the anchor by feeding each estimate back in, reusing one set of draws."""
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    posterior = as_samples(posterior_samples, target.dim)
    n_prop = posterior.shape[0] if S is None else int(S)
    _check_sizes(posterior, n_prop)
    terms = _terms(target, posterior, proposal, rng, n_prop)
    anchor = float(initial_anchor)
    history = []
    for it in range(1, max_iter + 1):
        value, num_ess, den_ess = terms.estimate(anchor)
        history.append(value)
        converged = abs(value - anchor) < ITER_TOL
        if converged or it == max_iter:
            break
        anchor = value
    if not converged and max_iter > 1:
        warnings.warn(f"iterative bridge did not settle within {max_iter} iterations", RuntimeWarning)
    return BridgeEstimate(value, num_ess, den_ess, anchor, method="bridge-iterative", n_iter=it,
                          diagnostics={"history": history, "converged": bool(converged)})


def normal_proposal(mean, cov) -> BridgeProposal:
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    chol = np.linalg.cholesky(cov)

    def draw(rng, n):
        return mean + rng.standard_normal((n, mean.size)) @ chol.T

    return BridgeProposal(lambda x: logpdf_mvn(np.atleast_2d(x), mean, cov), draw, "normal")


def copula_proposal(fit: CopulaFit, diagnostics: Optional[dict] = None) -> BridgeProposal:
    return BridgeProposal(lambda x: gaussian_copula_logpdf(fit, np.atleast_2d(x), diagnostics),
                          lambda rng, n: sample_gaussian_copula(rng, fit, n), "gaussian-copula")


def laplace_bridge(target: TargetModel, posterior_samples, mode: ModeSummary,
                   rng: np.random.Generator, S: Optional[int] = None) -> BridgeEstimate:
    """Bridge with a ``N(mode, inv(H))`` proposal and the Laplace estimate as anchor."""
    anchor = laplace_logml(mode).log_ml
    est = bridge_logml(target, posterior_samples, normal_proposal(mode.theta_hat, mode.covariance()),
                       rng, S, anchor)
    est.method = "LB"
    return est


def copula_bridge(target: TargetModel, posterior_samples, rng: np.random.Generator,
                  S: Optional[int] = None, fit: Optional[CopulaFit] = None) -> BridgeEstimate:
    """Bridge with the fitted Gaussian copula as proposal and its evidence estimate as anchor."""
    posterior = as_samples(posterior_samples, target.dim)
    if fit is None:
        fit = fit_gaussian_copula_sim(rng, posterior)
    anchor = copula_logml(target, fit).log_ml
    clamps = {"clamped": 0}
    est = bridge_logml(target, posterior, copula_proposal(fit, clamps), rng, S, anchor)
    est.method = "CLB"
    est.diagnostics.update(clamps)
    return est
