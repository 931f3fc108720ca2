import numpy as np
import pytest

from evidencia.core import TargetModel
from evidencia.densities import logpdf_mvn


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion(request):
    """Log one PASS/FAIL line for the terminal summary; returns the verdict."""
    def record(label: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  [{detail}]" if detail else "")
        request.config.acceptance_lines.append(line)
        print(line)
        return ok
    return record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gaussian_target(mean, cov, log_z=0.0):
    """``exp(log_z) * N(mean, cov)`` as a target with known evidence."""
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    return TargetModel(mean.size, lambda x: logpdf_mvn(np.atleast_2d(x), mean, cov) + log_z,
                       sampler=lambda r, n: r.multivariate_normal(mean, cov, size=n),
                       true_log_z=log_z, name="gaussian")
