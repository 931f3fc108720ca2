"""Concrete targets: the skew-t test bed and a synthetic binary-regression posterior."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import TargetModel
from .densities import LOG_2PI, SkewTParams, log_cdf_t, logpdf_skewt, sample_skewt
from .laplace import ModeSummary, OptimizationError, find_mode

log = logging.getLogger(__name__)

LINKS = ("logit", "robit3")


def skewt_params(k: int, nu: float, delta1: float) -> SkewTParams:
    if k < 1:
        raise ValueError("k must be at least 1")
    if not abs(delta1) < 1:
        raise ValueError("|delta1| must be below 1")
    delta = np.zeros(k)
    delta[0] = delta1
    return SkewTParams(np.zeros(k), np.eye(k), delta, nu)


def make_skewt_target(k: int, nu: float, delta1: float) -> TargetModel:
    """Normalized skew-t with identity scale and skewness on the first axis; log Z = 0."""
    params = skewt_params(k, nu, delta1)
    return TargetModel(
        dim=k,
        log_unnorm=lambda x: logpdf_skewt(np.atleast_2d(x), params),
        sampler=lambda rng, n: sample_skewt(rng, n, params),
        true_log_z=0.0,
        name=f"skewt(k={k}, nu={nu:g}, delta1={delta1:g})",
    )


# -- binary regression -----------------------------------------------------

@dataclass(frozen=True)
class GlmTarget:
    design: np.ndarray
    responses: np.ndarray
    prior_sd: float = 2.5
    link: str = "logit"
    beta_true: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.link not in LINKS:
            raise ValueError(f"link must be one of {LINKS}")
        if not np.all(np.isin(self.responses, (0, 1))):
            raise ValueError("responses must be 0/1")
        if np.linalg.matrix_rank(self.design) < self.design.shape[1]:
            raise ValueError("design matrix is not of full column rank")

    @property
    def q(self) -> int:
        return self.design.shape[1]

    def log_lik(self, beta: np.ndarray) -> np.ndarray:
        beta = np.atleast_2d(beta)
        out = np.empty(beta.shape[0])
        sign = 2.0 * self.responses - 1.0
        for start in range(0, beta.shape[0], 4096):
            eta = beta[start:start + 4096] @ self.design.T * sign
            if self.link == "logit":
                ll = -np.logaddexp(0.0, -eta)
            else:
                ll = log_cdf_t(eta, 3.0)
            out[start:start + 4096] = ll.sum(axis=1)
        return out

    def log_prior(self, beta: np.ndarray) -> np.ndarray:
        beta = np.atleast_2d(beta)
        sd = self.prior_sd
        return -0.5 * np.sum((beta / sd) ** 2, axis=1) - self.q * (0.5 * LOG_2PI + np.log(sd))

    def log_posterior(self, beta) -> np.ndarray:
        beta = np.asarray(beta, dtype=float)
        single = beta.ndim == 1
        out = self.log_lik(beta) + self.log_prior(beta)
        return out[0] if single else out.reshape(beta.shape[:-1])

    def to_target(self) -> TargetModel:
        return TargetModel(self.q, self.log_posterior, name=f"glm({self.link}, n={len(self.responses)}, q={self.q})")


def inverse_link(eta: np.ndarray, link: str) -> np.ndarray:
    if link == "logit":
        return 1.0 / (1.0 + np.exp(-eta))
    return np.exp(log_cdf_t(eta, 3.0))


def simulate_glm(rng: np.random.Generator, n: int, q: int, link: str = "logit",
                 prior_sd: float = 2.5) -> GlmTarget:
    """Intercept plus ``q - 1`` standard-normal covariates; coefficients on a grid in [-1, 1]."""
    if n < 5 * q:
        raise ValueError("need n >= 5 q observations")
    design = np.column_stack([np.ones(n), rng.standard_normal((n, q - 1))])
    beta = np.linspace(-1.0, 1.0, q) if q > 1 else np.array([0.5])
    y = (rng.random(n) < inverse_link(design @ beta, link)).astype(float)
    return GlmTarget(design, y, prior_sd, link, beta)


def make_glm_target(rng: np.random.Generator, n: int, q: int, link: str = "logit",
                    prior_sd: float = 2.5, max_attempts: int = 5):
    """Simulate a data set and return ``(glm, target, mode)``.

    Data sets whose posterior mode runs off towards the prior tails (the
    signature of quasi-separation) are discarded and redrawn.
    """
    for attempt in range(max_attempts):
        glm = simulate_glm(rng, n, q, link, prior_sd)
        target = glm.to_target()
        try:
            mode = find_mode(target)
        except OptimizationError:
            log.info("mode search failed on attempt %d; regenerating", attempt + 1)
            continue
        if np.max(np.abs(mode.theta_hat)) < 4 * prior_sd:
            return glm, target, mode
        log.info("separated data on attempt %d; regenerating", attempt + 1)
    raise OptimizationError(f"no usable data set in {max_attempts} attempts")


# -- random-walk Metropolis --------------------------------------------------

@dataclass
class ChainResult:
    samples: np.ndarray
    acceptance_rate: float
    warnings: list = field(default_factory=list)


def rw_metropolis(rng: np.random.Generator, target: TargetModel, mode: ModeSummary,
                  n_iter: int, burn_in: int = 0, scale: Optional[float] = None) -> ChainResult:
    """Random-walk Metropolis started at the mode with ``N(0, c^2 inv(H))`` increments.

    ``c`` defaults to ``2.38 / sqrt(p)``. Returns the ``n_iter - burn_in``
    post-burn-in states.
    """
    if not n_iter > burn_in >= 0:
        raise ValueError("need n_iter > burn_in >= 0")
    p = mode.dim
    c = 2.38 / np.sqrt(p) if scale is None else scale
    chol = np.linalg.cholesky(mode.covariance())
    steps = c * rng.standard_normal((n_iter, p)) @ chol.T
    log_u = np.log(rng.random(n_iter))
    g = target.log_unnorm

    current = mode.theta_hat.copy()
    current_lp = float(g(current[None, :])[0])
    out = np.empty((n_iter - burn_in, p))
    accepted = 0
    for i in range(n_iter):
        proposal = current + steps[i]
        lp = float(g(proposal[None, :])[0])
        if log_u[i] < lp - current_lp:
            current, current_lp = proposal, lp
            accepted += 1
        if i >= burn_in:
            out[i - burn_in] = current
    rate = accepted / n_iter
    notes = []
    if not 0.05 <= rate <= 0.7:
        notes.append(f"acceptance rate {rate:.3f} outside [0.05, 0.7]")
        log.warning(notes[-1])
    return ChainResult(out, rate, notes)
