"""Gaussian and t copula approximations to a posterior and the evidence estimates built on them."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Protocol, Sequence

import numpy as np
from scipy import special, stats

from .core import LogMlEstimate, TargetModel, as_samples
from .densities import LOG_2PI, logpdf_t1
from .grid import GridDistribution, log_to_density
from .kde import kde_fit
from .laplace import ModeSummary
from .robust import componentwise_median, mve_estimate

log = logging.getLogger(__name__)

DEFAULT_NU_GRID = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 50)
CLAMP = 1e-12


class TruncationError(RuntimeError):
    """A marginal slice still carries appreciable density at the grid edge."""


class ConvergenceError(RuntimeError):
    pass


class Marginal(Protocol):
    median: float

    def logpdf(self, x): ...
    def point_logpdf(self, x): ...
    def cdf(self, x): ...
    def ppf(self, u): ...


@dataclass(frozen=True)
class NormalMarginal:
    loc: float
    scale: float

    @property
    def median(self) -> float:
        return self.loc

    def logpdf(self, x):
        z = (np.asarray(x, dtype=float) - self.loc) / self.scale
        return -0.5 * (LOG_2PI + z * z) - np.log(self.scale)

    point_logpdf = logpdf

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.loc) / self.scale)

    def ppf(self, u):
        return self.loc + self.scale * special.ndtri(u)


@dataclass(frozen=True)
class HessianDecomposition:
    """``H = D C D`` and ``inv(H) = S A S`` with ``C``, ``A`` correlation matrices."""

    d: np.ndarray
    c: np.ndarray
    s: np.ndarray
    a: np.ndarray

    @property
    def powers(self) -> np.ndarray:
        """Exponents ``1 / (d_j^2 s_j^2)`` applied to the conditional slices."""
        return 1.0 / (self.d * self.s) ** 2


def _to_correlation(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sd = np.sqrt(np.diag(mat))
    corr = mat / np.outer(sd, sd)
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return sd, corr


def decompose_hessian(hessian) -> HessianDecomposition:
    h = np.atleast_2d(np.asarray(hessian, dtype=float))
    chol = np.linalg.cholesky(h)  # raises on non-SPD input
    h_inv = np.linalg.inv(chol).T @ np.linalg.inv(chol)
    d, c = _to_correlation(h)
    s, a = _to_correlation(0.5 * (h_inv + h_inv.T))
    return HessianDecomposition(d, c, s, a)


@dataclass(frozen=True)
class CopulaFit:
    family: str  # "gaussian" or "t"
    lam: np.ndarray
    marginals: Sequence[Marginal]
    reference: np.ndarray
    nu: Optional[float] = None
    info: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        lam = np.atleast_2d(np.asarray(self.lam, dtype=float))
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "reference", np.atleast_1d(np.asarray(self.reference, dtype=float)))
        if self.family not in ("gaussian", "t"):
            raise ValueError(f"unknown copula family {self.family!r}")
        if self.family == "t" and not (self.nu and self.nu > 0):
            raise ValueError("t copula needs positive degrees of freedom")
        if lam.shape != (self.dim, self.dim) or len(self.marginals) != self.dim:
            raise ValueError("correlation matrix, marginals and reference disagree in size")
        if not np.allclose(np.diag(lam), 1.0, atol=1e-10):
            raise ValueError("copula matrix must have unit diagonal")

    @property
    def dim(self) -> int:
        return self.reference.shape[0]


# -- analytic marginals ----------------------------------------------------

def analytic_marginal(target: TargetModel, mode: ModeSummary, dec: HessianDecomposition, j: int,
                      half_width: float = 8.0, per_sd: int = 256, max_doublings: int = 8,
                      max_nodes: int = (1 << 17) + 1, drop: float = 23.0) -> GridDistribution:
    """Overdispersed conditional slice through the mode along coordinate ``j``.

    The slice ``g(mode + (t - mode_j) e_j)`` is scaled by ``1 / (d_j^2 s_j^2)``
    in log space and tabulated on a uniform grid centred at the mode. The
    grid starts at ``+- half_width * s_j`` and doubles its half-width until
    both edges sit ``drop`` log units below the peak.
    """
    centre = mode.theta_hat[j]
    sd = dec.s[j]
    power = dec.powers[j]
    width = half_width * sd
    step = sd / per_sd
    for attempt in range(max_doublings + 1):
        m = min(2 * int(round(width / step)) + 1, max_nodes)
        nodes = np.linspace(centre - width, centre + width, m)
        pts = np.repeat(mode.theta_hat[None, :], m, axis=0)
        pts[:, j] = nodes
        with np.errstate(invalid="ignore", over="ignore"):
            logv = power * np.asarray(target.log_unnorm(pts), dtype=float)
        logv = np.where(np.isfinite(logv), logv, -np.inf)
        peak = np.max(logv)
        if max(logv[0], logv[-1]) <= peak - drop:
            break
        width *= 2.0
    else:
        raise TruncationError(f"slice {j} not captured within +-{width / 2:.3g}")
    return GridDistribution(nodes, log_to_density(logv))


def marginal_expectation(marginal: GridDistribution, func=None) -> float:
    return marginal.expectation(func)


def fit_gaussian_copula_analytic(target: TargetModel, mode: ModeSummary,
                                 reference: str = "median") -> CopulaFit:
    """Copula with overdispersed-slice marginals and correlation ``A`` from ``inv(H)``."""
    dec = decompose_hessian(mode.hessian)
    marginals = [analytic_marginal(target, mode, dec, j) for j in range(mode.dim)]
    if reference == "median":
        ref = np.array([m.median for m in marginals])
    elif reference == "mode":
        ref = mode.theta_hat.copy()
    else:
        raise ValueError("reference must be 'median' or 'mode'")
    return CopulaFit("gaussian", dec.a, marginals, ref, info={"powers": dec.powers.tolist()})


# -- simulation-based fits --------------------------------------------------

def _pseudo_observations(x: np.ndarray) -> np.ndarray:
    return (stats.rankdata(x, axis=0, method="average") - 0.5) / x.shape[0]


def normal_scores(samples) -> np.ndarray:
    """Per-column ``Phi^-1((rank - 0.5) / s)`` with average ranks for ties."""
    x = as_samples(samples)
    if x.shape[0] < 2:
        raise ValueError("need at least two draws")
    return special.ndtri(_pseudo_observations(x))


def fit_gaussian_copula_sim(rng: np.random.Generator, samples,
                            n_subsets: Optional[int] = None) -> CopulaFit:
    """KDE marginals plus a robust (MVE) correlation of the normal scores."""
    x = as_samples(samples)
    s, p = x.shape
    if s < 10 * p:
        raise ValueError("need at least 10 * p draws")
    marginals = [kde_fit(x[:, j]) for j in range(p)]
    if p == 1:
        lam = np.ones((1, 1))
        kept = s
    else:
        robust = mve_estimate(rng, normal_scores(x), n_subsets=n_subsets)
        lam = robust.correlation()
        kept = robust.n_kept
    return CopulaFit("gaussian", lam, marginals, componentwise_median(x),
                     info={"mve_kept": kept, "bandwidths": [m.bandwidth for m in marginals]})


def _latent(fit: CopulaFit, theta: np.ndarray, diagnostics: Optional[dict]):
    u = np.column_stack([m.cdf(theta[:, j]) for j, m in enumerate(fit.marginals)])
    clamped = int(np.count_nonzero((u < CLAMP) | (u > 1 - CLAMP)))
    if clamped:
        level = logging.WARNING if diagnostics is None else logging.DEBUG
        log.log(level, "clamped %d marginal CDF values into [%g, 1 - %g]", clamped, CLAMP, CLAMP)
        if diagnostics is not None:
            diagnostics["clamped"] = diagnostics.get("clamped", 0) + clamped
    return np.clip(u, CLAMP, 1 - CLAMP)


def _copula_log_density(fit: CopulaFit, theta, exact_point: bool, diagnostics=None):
    theta = np.asarray(theta, dtype=float)
    single = theta.ndim == 1
    theta = np.atleast_2d(theta)
    u = _latent(fit, theta, diagnostics)
    if exact_point:
        log_marg = sum(m.point_logpdf(theta[:, j]) for j, m in enumerate(fit.marginals))
    else:
        log_marg = sum(m.logpdf(theta[:, j]) for j, m in enumerate(fit.marginals))
    logdet = np.linalg.slogdet(fit.lam)[1]
    if fit.family == "gaussian":
        eta = special.ndtri(u)
        prec = np.linalg.inv(fit.lam)
        quad = np.einsum("ni,ij,nj->n", eta, np.eye(fit.dim) - prec, eta)
        out = -0.5 * logdet + 0.5 * quad + log_marg
    else:
        nu = fit.nu
        eta = special.stdtrit(nu, u)
        prec = np.linalg.inv(fit.lam)
        maha = np.einsum("ni,ij,nj->n", eta, prec, eta)
        p = fit.dim
        joint = (special.gammaln(0.5 * (nu + p)) - special.gammaln(0.5 * nu)
                 - 0.5 * p * np.log(nu * np.pi) - 0.5 * logdet
                 - 0.5 * (nu + p) * np.log1p(maha / nu))
        out = joint - np.sum(logpdf_t1(eta, nu), axis=1) + log_marg
    return float(out[0]) if single else out


def gaussian_copula_logpdf(fit: CopulaFit, theta, diagnostics: Optional[dict] = None):
    """Gaussian copula log density; rows of ``theta`` are evaluated independently."""
    if fit.family != "gaussian":
        raise ValueError("fit is not a Gaussian copula")
    return _copula_log_density(fit, theta, exact_point=False, diagnostics=diagnostics)


def t_copula_logpdf(fit: CopulaFit, theta, diagnostics: Optional[dict] = None):
    if fit.family != "t":
        raise ValueError("fit is not a t copula")
    return _copula_log_density(fit, theta, exact_point=False, diagnostics=diagnostics)


def copula_logml(target: TargetModel, fit: CopulaFit, method: str = "CL") -> LogMlEstimate:
    """Candidate's-formula estimate ``g(ref) - log q(ref)`` with ``q`` the copula density."""
    ref = fit.reference
    diag: dict = {}
    log_q = _copula_log_density(fit, ref, exact_point=True, diagnostics=diag)
    g_ref = float(target.log_unnorm(ref[None, :])[0])
    diag.update(reference=ref.tolist(), **fit.info)
    return LogMlEstimate(method, g_ref - log_q, diag)


def sample_gaussian_copula(rng: np.random.Generator, fit: CopulaFit, n: int) -> np.ndarray:
    """Draw ``Z ~ N(0, lam)`` and map each coordinate through ``F_j^-1(Phi(Z_j))``."""
    if fit.family != "gaussian":
        raise ValueError("fit is not a Gaussian copula")
    chol = np.linalg.cholesky(fit.lam)
    z = rng.standard_normal((n, fit.dim)) @ chol.T
    u = np.clip(special.ndtr(z), np.finfo(float).tiny, 1 - np.finfo(float).epsneg)
    return np.column_stack([m.ppf(u[:, j]) for j, m in enumerate(fit.marginals)])


# -- t copula ---------------------------------------------------------------

def t_correlation_mle(scores: np.ndarray, nu: float, tol: float = 1e-8,
                      max_iter: int = 500, init: Optional[np.ndarray] = None) -> np.ndarray:
    """Fixed-point estimate of the t scale matrix, rescaled to a correlation each step."""
    s, p = scores.shape
    if init is None:
        _, lam = _to_correlation(np.atleast_2d(np.cov(scores, rowvar=False)))
    else:
        lam = np.asarray(init, dtype=float)
    for _ in range(max_iter):
        prec = np.linalg.inv(lam)
        maha = np.sum((scores @ prec) * scores, axis=1)
        w = (nu + p) / (nu + maha)
        _, new = _to_correlation((scores * w[:, None]).T @ scores / s)
        if np.linalg.norm(new - lam) < tol:
            return new
        lam = new
    raise ConvergenceError(f"t correlation fixed point did not converge for nu={nu}")


def t_copula_loglik(scores: np.ndarray, lam: np.ndarray, nu: float) -> float:
    s, p = scores.shape
    prec = np.linalg.inv(lam)
    logdet = np.linalg.slogdet(lam)[1]
    maha = np.sum((scores @ prec) * scores, axis=1)
    joint = (special.gammaln(0.5 * (nu + p)) - special.gammaln(0.5 * nu)
             - 0.5 * p * np.log(nu * np.pi) - 0.5 * logdet - 0.5 * (nu + p) * np.log1p(maha / nu))
    return float(np.sum(joint) - np.sum(logpdf_t1(scores, nu)))


def fit_t_copula(samples, nu_grid: Sequence[float] = DEFAULT_NU_GRID) -> CopulaFit:
    """t copula with ``nu`` chosen by grid search on the rank-based copula likelihood."""
    x = as_samples(samples)
    s, p = x.shape
    if s < 10 * p:
        raise ValueError("need at least 10 * p draws")
    if len(nu_grid) == 0:
        raise ValueError("nu grid is empty")
    # every column holds (nearly) the same set of rank values; invert each once
    levels, index = np.unique(_pseudo_observations(x), return_inverse=True)
    index = index.reshape(s, p)
    profile = {}
    best = None
    lam = None
    for nu in nu_grid:
        scores = special.stdtrit(nu, levels)[index]
        lam = t_correlation_mle(scores, nu, init=lam) if p > 1 else np.ones((1, 1))
        ll = t_copula_loglik(scores, lam, nu)
        profile[float(nu)] = ll
        if best is None or ll > best[0]:
            best = (ll, float(nu), lam)
    _, nu, lam = best
    marginals = [kde_fit(x[:, j]) for j in range(p)]
    return CopulaFit("t", lam, marginals, componentwise_median(x), nu=nu,
                     info={"nu": nu, "profile": profile})


def t_copula_logml(target: TargetModel, fit: CopulaFit) -> LogMlEstimate:
    """Evidence estimate from a t copula evaluated at the componentwise median (``eta = 0``)."""
    if fit.family != "t":
        raise ValueError("fit is not a t copula")
    nu, p = fit.nu, fit.dim
    ref = fit.reference
    g_ref = float(target.log_unnorm(ref[None, :])[0])
    log_marg = sum(float(m.point_logpdf(ref[j])) for j, m in enumerate(fit.marginals))
    gamma_terms = (p * special.gammaln(0.5 * (nu + 1)) - special.gammaln(0.5 * (nu + p))
                   - (p - 1) * special.gammaln(0.5 * nu))
    value = g_ref + 0.5 * np.linalg.slogdet(fit.lam)[1] - log_marg + gamma_terms
    return LogMlEstimate("TC", float(value), {"nu": nu, "reference": ref.tolist()})
