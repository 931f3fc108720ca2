"""Marginal likelihood estimation by Laplace, copula and bridge-sampling methods."""
from .bridge import BridgeEstimate, bridge_logml, copula_bridge, iterative_bridge, laplace_bridge
from .copula import (CopulaFit, copula_logml, fit_gaussian_copula_analytic, fit_gaussian_copula_sim,
                     fit_t_copula, gaussian_copula_logpdf, t_copula_logml, t_copula_logpdf)
from .core import EstimationError, LogMlEstimate, TargetModel
from .harness import BenchmarkConfig, BenchmarkReport, emit_report, run_benchmark, run_glm_demo
from .laplace import ModeSummary, find_mode, laplace_logml, laplace_sim_logml
from .targets import GlmTarget, make_glm_target, make_skewt_target, rw_metropolis

__version__ = "0.1.0"

__all__ = [
    "BenchmarkConfig", "BenchmarkReport", "BridgeEstimate", "CopulaFit", "EstimationError", "GlmTarget",
    "LogMlEstimate", "ModeSummary", "TargetModel", "bridge_logml", "copula_bridge", "copula_logml",
    "emit_report", "find_mode", "fit_gaussian_copula_analytic", "fit_gaussian_copula_sim", "fit_t_copula",
    "gaussian_copula_logpdf", "iterative_bridge", "laplace_bridge", "laplace_logml", "laplace_sim_logml",
    "make_glm_target", "make_skewt_target", "rw_metropolis", "run_benchmark", "run_glm_demo",
    "t_copula_logml", "t_copula_logpdf",
]
