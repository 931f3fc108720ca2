"""Mode finding, finite-difference derivatives and Laplace-type evidence estimates."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .core import LogMlEstimate, TargetModel, as_samples
from .densities import LOG_2PI
from .robust import componentwise_median, mve_estimate

log = logging.getLogger(__name__)

GRAD_TOL = 1e-6


class OptimizationError(RuntimeError):
    pass


class SaddlePointError(OptimizationError):
    """The negative Hessian at the located stationary point is not positive definite."""


@dataclass(frozen=True)
class ModeSummary:
    theta_hat: np.ndarray
    hessian: np.ndarray
    log_f_at_mode: float
    grad_norm: float = 0.0

    @property
    def dim(self) -> int:
        return self.theta_hat.shape[0]

    def covariance(self) -> np.ndarray:
        return np.linalg.inv(self.hessian)


def _steps(theta: np.ndarray, rel: float) -> np.ndarray:
    return rel * np.maximum(1.0, np.abs(theta))


def numerical_gradient(func, theta, rel_step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a vectorized scalar function."""
    theta = np.asarray(theta, dtype=float)
    p = theta.size
    h = _steps(theta, rel_step)
    pts = np.repeat(theta[None, :], 2 * p, axis=0)
    pts[np.arange(p), np.arange(p)] += h
    pts[p + np.arange(p), np.arange(p)] -= h
    vals = np.asarray(func(pts), dtype=float)
    return (vals[:p] - vals[p:]) / (2.0 * h)


def numerical_hessian(func, theta, rel_step: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian, steps ``rel_step * max(1, |theta_j|)``."""
    theta = np.asarray(theta, dtype=float)
    p = theta.size
    h = _steps(theta, rel_step)
    eye = np.diag(h)
    pts = [theta, *(theta + eye), *(theta - eye)]
    pairs = [(j, k) for j in range(p) for k in range(j + 1, p)]
    for j, k in pairs:
        pts += [theta + eye[j] + eye[k], theta + eye[j] - eye[k],
                theta - eye[j] + eye[k], theta - eye[j] - eye[k]]
    vals = np.asarray(func(np.array(pts)), dtype=float)
    f0, plus, minus = vals[0], vals[1:p + 1], vals[p + 1:2 * p + 1]
    hess = np.diag((plus - 2.0 * f0 + minus) / h**2)
    cross = vals[2 * p + 1:].reshape(-1, 4)
    for (j, k), (pp, pm, mp, mm) in zip(pairs, cross):
        hess[j, k] = hess[k, j] = (pp - pm - mp + mm) / (4.0 * h[j] * h[k])
    return hess


def find_mode(target: TargetModel, x0=None, max_newton: int = 50) -> ModeSummary:
    """Maximize ``target.log_unnorm``; return the mode and ``H = -g''(mode)``.

    A quasi-Newton search on finite-difference gradients gets close, then
    damped Newton steps on finite-difference Hessians drive the gradient
    below ``GRAD_TOL``.
    """
    x0 = target.starting_point() if x0 is None else np.asarray(x0, dtype=float)
    g = target.log_unnorm

    def neg(theta):
        val = float(g(np.asarray(theta)[None, :])[0])
        return -val if np.isfinite(val) else 1e300

    def neg_grad(theta):
        return -numerical_gradient(g, theta)

    if not np.isfinite(neg(x0)) or neg(x0) >= 1e300:
        raise OptimizationError("log density is not finite at the starting point")
    res = optimize.minimize(neg, x0, jac=neg_grad, method="BFGS",
                            options={"gtol": 1e-7, "maxiter": 2000})
    theta = np.asarray(res.x, dtype=float)
    value = -neg(theta)

    for _ in range(max_newton):
        grad = numerical_gradient(g, theta)
        if np.max(np.abs(grad)) < GRAD_TOL:
            break
        hess = -numerical_hessian(g, theta)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = grad
        if not np.all(np.isfinite(step)) or step @ grad <= 0:
            step = grad / max(1.0, np.max(np.abs(hess)))
        for _ in range(40):
            trial = theta + step
            trial_value = -neg(trial)
            if trial_value >= value - 1e-12 * abs(value):
                theta, value = trial, trial_value
                break
            step = 0.5 * step
        else:
            break
    grad = numerical_gradient(g, theta)
    grad_norm = float(np.max(np.abs(grad)))
    if not grad_norm < GRAD_TOL:
        raise OptimizationError(f"mode search stalled with |grad|_inf = {grad_norm:.3g}")
    hess = -numerical_hessian(g, theta)
    hess = 0.5 * (hess + hess.T)
    try:
        np.linalg.cholesky(hess)
    except np.linalg.LinAlgError as exc:
        raise SaddlePointError("negative Hessian at the stationary point is not SPD") from exc
    return ModeSummary(theta, hess, float(value), grad_norm)


def laplace_logml(mode: ModeSummary) -> LogMlEstimate:
    """Ordinary Laplace approximation ``(p/2) log 2pi - 1/2 log|H| + g(mode)``."""
    p = mode.dim
    logdet = np.linalg.slogdet(mode.hessian)[1]
    value = 0.5 * p * LOG_2PI - 0.5 * logdet + mode.log_f_at_mode
    return LogMlEstimate("L1", float(value), {"theta_hat": mode.theta_hat.tolist()})


def laplace_sim_logml(target: TargetModel, samples, rng: Optional[np.random.Generator] = None,
                      n_subsets: Optional[int] = None) -> LogMlEstimate:
    """Simulation-based Laplace estimate centred at the componentwise median.

    Uses the robust (MVE) scatter of the draws in place of ``inv(H)``:
    ``g(median) + (p/2) log 2pi + 1/2 log|scatter|``.
    """
    x = as_samples(samples, target.dim)
    p = x.shape[1]
    if x.shape[0] < 10 * p:
        raise ValueError("need at least 10 * p posterior draws")
    rng = np.random.default_rng() if rng is None else rng
    center = componentwise_median(x)
    robust = mve_estimate(rng, x, n_subsets=n_subsets)
    sign, logdet = np.linalg.slogdet(robust.scatter)
    if sign <= 0:
        raise np.linalg.LinAlgError("robust scatter is not positive definite")
    g_center = float(target.log_unnorm(center[None, :])[0])
    value = g_center + 0.5 * p * LOG_2PI + 0.5 * logdet
    return LogMlEstimate("L2", float(value), {"median": center.tolist(), "mve_kept": robust.n_kept})
