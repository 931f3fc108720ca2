"""Seeded benchmark runs over the skew-t grid and the synthetic GLM, plus report output."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import product
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from .bridge import copula_bridge, laplace_bridge
from .copula import copula_logml, fit_gaussian_copula_analytic, fit_gaussian_copula_sim, fit_t_copula, t_copula_logml
from .core import TargetModel
from .laplace import ModeSummary, find_mode, laplace_logml, laplace_sim_logml
from .targets import make_glm_target, make_skewt_target, rw_metropolis

log = logging.getLogger(__name__)

METHODS = ("L1", "L2", "CL1", "CL2", "TC", "LB", "CLB")
DETERMINISTIC = frozenset({"L1", "CL1"})
FORMATS = ("csv", "markdown", "json")

PROFILES = {
    "full": {"s": 10_000, "S": 10_000, "replicates": 50},
    "desk": {"s": 5_000, "S": 5_000, "replicates": 10},
}


# -- seeding ------------------------------------------------------------------

def derive_rng(master_seed: int, *key) -> np.random.Generator:
    """Independent generator for ``key``; unrelated keys never share a stream."""
    digest = hashlib.sha256(json.dumps([int(master_seed), *map(str, key)]).encode()).digest()
    words = np.frombuffer(digest, dtype=np.uint32)
    return np.random.default_rng(np.random.SeedSequence(words.tolist()))


def sample_digest(samples: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(samples, dtype=np.float64).tobytes()).hexdigest()[:16]


# -- method dispatch ------------------------------------------------------------

def _scalars(diag: dict) -> dict:
    out = {}
    for key, val in diag.items():
        if isinstance(val, (bool, int, str)):
            out[key] = val
        elif isinstance(val, (float, np.floating)):
            out[key] = round(float(val), 10)
    return out


def estimate(method: str, target: TargetModel, rng: np.random.Generator,
             mode: Optional[ModeSummary] = None, samples: Optional[np.ndarray] = None,
             S: Optional[int] = None) -> tuple[float, dict]:
    """Run one estimator; returns ``(log_ml, scalar diagnostics)``."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if method in ("L1", "CL1", "LB") and mode is None:
        mode = find_mode(target)
    if method not in DETERMINISTIC and samples is None:
        raise ValueError(f"{method} needs posterior draws")
    if method == "L1":
        est = laplace_logml(mode)
    elif method == "CL1":
        est = copula_logml(target, fit_gaussian_copula_analytic(target, mode), "CL1")
    elif method == "L2":
        est = laplace_sim_logml(target, samples, rng)
    elif method == "CL2":
        est = copula_logml(target, fit_gaussian_copula_sim(rng, samples), "CL2")
    elif method == "TC":
        est = t_copula_logml(target, fit_t_copula(samples))
    elif method == "LB":
        est = laplace_bridge(target, samples, mode, rng, S)
    else:
        est = copula_bridge(target, samples, rng, S)
    diag = _scalars(est.diagnostics)
    if hasattr(est, "numerator_ess"):
        diag.update(numerator_ess=round(est.numerator_ess, 3), denominator_ess=round(est.denominator_ess, 3))
    return float(est.log_ml), diag


def _attempt(func: Callable, *args, **kwargs) -> dict:
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            value, diag = func(*args, **kwargs)
            if not math.isfinite(value):
                raise FloatingPointError("estimate is not finite")
            error = None
        except Exception as exc:  # recorded per cell; the run carries on
            value, diag, error = None, {}, f"{type(exc).__name__}: {exc}"
    if caught:
        diag["warnings"] = len(caught)
    return {"value": value, "error": error, "diagnostics": diag, "seconds": time.perf_counter() - start}


# -- report types -------------------------------------------------------------

@dataclass
class CellResult:
    cell: dict
    method: str
    values: list
    errors: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    seconds: float = field(default=0.0, compare=False)

    @property
    def replicates(self) -> int:
        return len(self.values) + len(self.errors)

    @property
    def mean(self) -> Optional[float]:
        return float(np.mean(self.values)) if self.values else None

    @property
    def sd(self) -> Optional[float]:
        return float(np.std(self.values, ddof=1)) if len(self.values) > 1 else None

    @property
    def failed(self) -> bool:
        return bool(self.errors)


@dataclass
class BenchmarkReport:
    kind: str
    config: dict
    results: list
    diagnostics: dict = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return any(r.failed for r in self.results)

    def lookup(self, method: str, **cell) -> CellResult:
        for r in self.results:
            if r.method == method and all(r.cell.get(k) == v for k, v in cell.items()):
                return r
        raise KeyError((method, cell))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "config": self.config,
            "results": [{"cell": r.cell, "method": r.method, "mean": r.mean, "sd": r.sd,
                         "replicates": r.replicates, "values": r.values, "errors": r.errors,
                         "diagnostics": r.diagnostics} for r in self.results],
            "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkReport":
        results = [CellResult(r["cell"], r["method"], list(r["values"]), list(r["errors"]), list(r["diagnostics"]))
                   for r in data["results"]]
        return cls(data["kind"], data["config"], results, data.get("diagnostics", {}))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# -- skew-t grid -------------------------------------------------------------

@dataclass(frozen=True)
class BenchmarkConfig:
    nu_list: tuple = (3.0, 10.0)
    delta_list: tuple = (0.0, 0.5, 0.99)
    k_list: tuple = (2, 5, 10)
    methods: tuple = METHODS
    s: int = 10_000
    S: int = 10_000
    replicates: int = 50
    master_seed: int = 20_100_517
    output_path: Optional[str] = None

    def __post_init__(self):
        for name in ("nu_list", "delta_list", "k_list", "methods"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "nu_list", tuple(float(v) for v in self.nu_list))
        object.__setattr__(self, "delta_list", tuple(float(v) for v in self.delta_list))
        object.__setattr__(self, "k_list", tuple(int(v) for v in self.k_list))
        if not (self.nu_list and self.delta_list and self.k_list):
            raise ValueError("benchmark grid is empty")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ValueError(f"methods must be a nonempty subset of {METHODS}")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.s < 100 or self.S < 100:
            raise ValueError("s and S must be at least 100")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @classmethod
    def profile(cls, name: str, **overrides) -> "BenchmarkConfig":
        if name not in PROFILES:
            raise ValueError(f"unknown profile {name!r}")
        return cls(**{**PROFILES[name], **overrides})

    def cells(self) -> list:
        return [{"nu": nu, "delta1": d, "k": k} for k, nu, d in product(self.k_list, self.nu_list, self.delta_list)]

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("output_path")
        return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}


def _skewt_deterministic(cell: dict, methods: Sequence[str]) -> dict:
    target = make_skewt_target(cell["k"], cell["nu"], cell["delta1"])
    mode = find_mode(target)
    return {m: _attempt(estimate, m, target, None, mode=mode) for m in methods}


def _skewt_replicate(config: BenchmarkConfig, cell: dict, rep: int) -> dict:
    key = (cell["nu"], cell["delta1"], cell["k"], rep)
    target = make_skewt_target(cell["k"], cell["nu"], cell["delta1"])
    samples = target.sampler(derive_rng(config.master_seed, *key, "posterior"), config.s)
    mode = find_mode(target) if "LB" in config.methods else None
    out = {"sample": sample_digest(samples)}
    for m in config.methods:
        if m not in DETERMINISTIC:
            out[m] = _attempt(estimate, m, target, derive_rng(config.master_seed, *key, m),
                              mode=mode, samples=samples, S=config.S)
    return out


def _call(job):
    func, args = job
    return func(*args)


def worker_count() -> int:
    cap = os.cpu_count() or 1
    env = os.environ.get("EVIDENCIA_THREADS")
    if env:
        try:
            cap = min(cap, max(1, int(env)))
        except ValueError:
            log.warning("ignoring non-integer EVIDENCIA_THREADS=%r", env)
    return cap


def _run_jobs(jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [_call(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_call, jobs))


def _collect(cell: dict, method: str, attempts: list) -> CellResult:
    res = CellResult(cell, method, [])
    for a in attempts:
        if a["error"] is None:
            res.values.append(a["value"])
        else:
            res.errors.append(a["error"])
        res.diagnostics.append(a["diagnostics"])
        res.seconds += a["seconds"]
    return res


def run_benchmark(config: BenchmarkConfig, workers: Optional[int] = None) -> BenchmarkReport:
    """Every method on every grid cell; replicates of one cell share a posterior sample per replicate."""
    workers = worker_count() if workers is None else workers
    cells = config.cells()
    det = [m for m in config.methods if m in DETERMINISTIC]
    sim = [m for m in config.methods if m not in DETERMINISTIC]
    jobs = [(_skewt_deterministic, (c, det)) for c in cells] if det else []
    n_det = len(jobs)
    if sim:
        jobs += [(_skewt_replicate, (config, c, r)) for c in cells for r in range(config.replicates)]
    outputs = _run_jobs(jobs, workers)

    results, digests = [], {}
    for i, cell in enumerate(cells):
        label = f"nu={cell['nu']:g},delta1={cell['delta1']:g},k={cell['k']}"
        reps = outputs[n_det + i * config.replicates: n_det + (i + 1) * config.replicates] if sim else []
        if reps:
            digests[label] = [r["sample"] for r in reps]
        for m in config.methods:
            attempts = [outputs[i][m]] if m in DETERMINISTIC else [r[m] for r in reps]
            results.append(_collect(cell, m, attempts))
    report = BenchmarkReport("skewt", config.to_dict(), results, {"sample_digests": digests})
    if config.output_path:
        emit_report(report, _format_from_path(config.output_path), config.output_path)
    return report


# -- GLM demo -------------------------------------------------------------------

def run_glm_demo(seed: int, n: int = 190, q: int = 5, link: str = "logit",
                 methods: Sequence[str] = METHODS, s: int = 10_000, replicates: int = 1,
                 gs_draws: int = 100_000, gold_standard: Optional[bool] = None,
                 workers: Optional[int] = None) -> BenchmarkReport:
    """Synthetic binary-regression posterior; MH draws feed the simulation methods.

    The GS row is a Laplace bridge on ``gs_draws`` MH draws each side. By
    default it is only produced when a simulation method is requested.
    """
    methods = tuple(methods)
    if not methods or any(m not in METHODS for m in methods):
        raise ValueError(f"methods must be a nonempty subset of {METHODS}")
    if replicates < 1:
        raise ValueError("replicates must be at least 1")
    sim = [m for m in methods if m not in DETERMINISTIC]
    gold_standard = bool(sim) if gold_standard is None else gold_standard
    workers = worker_count() if workers is None else workers

    jobs = [(_glm_deterministic, (seed, n, q, link, methods))]
    jobs += [(_glm_replicate, (seed, n, q, link, sim, s, r)) for r in range(replicates)] if sim else []
    if gold_standard:
        jobs.append((_glm_gold, (seed, n, q, link, gs_draws)))
    outputs = _run_jobs(jobs, workers)

    det_out, rep_out = outputs[0], outputs[1:1 + (replicates if sim else 0)]
    cell = {"link": link, "n": n, "q": q}
    results = []
    for m in methods:
        attempts = [det_out[m]] if m in DETERMINISTIC else [r[m] for r in rep_out]
        results.append(_collect(cell, m, attempts))
    diagnostics = {"acceptance": [r["acceptance"] for r in rep_out], "sample_digests": [r["sample"] for r in rep_out]}
    if gold_standard:
        gold = outputs[-1]
        results.append(_collect(cell, "GS", [gold["GS"]]))
        diagnostics["gs_acceptance"] = gold["acceptance"]
    config = {"seed": seed, "n": n, "q": q, "link": link, "methods": list(methods), "s": s,
              "replicates": replicates, "gs_draws": gs_draws if gold_standard else None}
    return BenchmarkReport("glm", config, results, diagnostics)


def _glm_setup(seed, n, q, link):
    return make_glm_target(derive_rng(seed, "glm-data", n, q, link), n, q, link)


def _glm_deterministic(seed, n, q, link, methods):
    _, target, mode = _glm_setup(seed, n, q, link)
    return {m: _attempt(estimate, m, target, None, mode=mode) for m in methods if m in DETERMINISTIC}


def _chain(seed, target, mode, draws, *key):
    burn = draws // 5
    return rw_metropolis(derive_rng(seed, *key), target, mode, draws + burn, burn)


def _glm_replicate(seed, n, q, link, methods, s, rep):
    _, target, mode = _glm_setup(seed, n, q, link)
    chain = _chain(seed, target, mode, s, "glm-chain", rep)
    out = {"acceptance": round(chain.acceptance_rate, 6), "sample": sample_digest(chain.samples)}
    for m in methods:
        out[m] = _attempt(estimate, m, target, derive_rng(seed, "glm-method", rep, m),
                          mode=mode, samples=chain.samples, S=s)
    return out


def _glm_gold(seed, n, q, link, draws):
    _, target, mode = _glm_setup(seed, n, q, link)
    chain = _chain(seed, target, mode, draws, "glm-gold-chain")
    return {"acceptance": round(chain.acceptance_rate, 6),
            "GS": _attempt(estimate, "LB", target, derive_rng(seed, "glm-gold"), mode=mode,
                           samples=chain.samples, S=draws)}


# -- output ---------------------------------------------------------------------

def _format_from_path(path) -> str:
    suffix = Path(path).suffix.lower()
    return {".csv": "csv", ".md": "markdown", ".json": "json"}.get(suffix, "json")


def _num(x: Optional[float], digits: int = 2) -> str:
    return "NA" if x is None else f"{x:.{digits}f}"


def format_cell(result: CellResult, digits: int = 2) -> str:
    """``mean (sd)``; bare mean when there is no spread to report; ``NA`` when every run failed."""
    if result.mean is None:
        return "NA"
    if result.sd is None:
        return _num(result.mean, digits)
    return f"{_num(result.mean, digits)} ({_num(result.sd, digits)})"


def _note(result: CellResult) -> str:
    if not result.errors:
        return ""
    first = result.errors[0]
    return f"{len(result.errors)} failed: {first}" if len(result.errors) > 1 else first


def report_csv(report: BenchmarkReport) -> str:
    keys = list(report.results[0].cell) if report.results else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*keys, "method", "mean", "sd", "replicates", "seconds", "note"])
    for r in report.results:
        writer.writerow([*(r.cell[k] for k in keys), r.method,
                         "NA" if r.mean is None else repr(r.mean), "" if r.sd is None else repr(r.sd),
                         r.replicates, f"{r.seconds:.3f}", _note(r)])
    return buf.getvalue()


def report_markdown(report: BenchmarkReport) -> str:
    if report.kind == "skewt":
        return _skewt_markdown(report)
    lines = []
    cell = report.results[0].cell if report.results else {}
    lines.append("  ".join(f"{k}={v}" for k, v in cell.items()))
    lines += ["", "| method | estimate | note |", "|---|---|---|"]
    lines += [f"| {r.method} | {format_cell(r, 3)} | {_note(r)} |" for r in report.results]
    return "\n".join(lines) + "\n"


def _skewt_markdown(report: BenchmarkReport) -> str:
    cfg = report.config
    deltas = cfg["delta_list"]
    blocks = []
    for k in cfg["k_list"]:
        head = " | ".join(f"delta1={d:g}" for d in deltas)
        lines = [f"### k = {k}", "", f"| nu | method | {head} | note |",
                 "|---|---|" + "---|" * len(deltas) + "---|"]
        for nu in cfg["nu_list"]:
            for m in cfg["methods"]:
                row = [report.lookup(m, nu=nu, delta1=d, k=k) for d in deltas]
                notes = "; ".join(f"delta1={d:g}: {_note(r)}" for d, r in zip(deltas, row) if r.errors)
                lines.append(f"| {nu:g} | {m} | " + " | ".join(format_cell(r) for r in row) + f" | {notes} |")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def render_report(report: BenchmarkReport, fmt: str) -> str:
    fmt = "markdown" if fmt == "md" else fmt
    if fmt == "csv":
        return report_csv(report)
    if fmt == "markdown":
        return report_markdown(report)
    if fmt == "json":
        return report.to_json() + "\n"
    raise ValueError(f"format must be one of {FORMATS}")


def emit_report(report: BenchmarkReport, fmt: str, path) -> Path:
    path = Path(path)
    path.write_text(render_report(report, fmt))
    return path


def load_report(path) -> BenchmarkReport:
    return BenchmarkReport.from_dict(json.loads(Path(path).read_text()))
