"""Command line entry point: ``evidencia bench skewt|glm`` and ``evidencia estimate``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .harness import (METHODS, PROFILES, BenchmarkConfig, derive_rng, estimate, render_report,
                      run_benchmark, run_glm_demo)
from .laplace import find_mode
from .targets import LINKS, make_glm_target, make_skewt_target, rw_metropolis

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list:
    return [int(v) for v in text.split(",") if v.strip()]


def _methods(text: str) -> list:
    names = [v.strip().upper() for v in text.split(",") if v.strip()]
    bad = [m for m in names if m not in METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}; choose from {','.join(METHODS)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evidencia", description="Marginal likelihood estimators and benchmarks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run a benchmark")
    which = bench.add_subparsers(dest="target", required=True)

    def output_options(p):
        p.add_argument("--methods", type=_methods, default=list(METHODS))
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", type=Path, default=None, help="write here instead of stdout")
        p.add_argument("--format", choices=("csv", "md", "markdown", "json"), default="md")
        p.add_argument("--threads", type=int, default=None, help="worker processes (default EVIDENCIA_THREADS)")

    sk = which.add_parser("skewt", help="skew-t grid")
    sk.add_argument("--nu", type=_floats, default=None)
    sk.add_argument("--delta", type=_floats, default=None)
    sk.add_argument("--k", type=_ints, default=None)
    sk.add_argument("--s", type=int, default=None)
    sk.add_argument("--S", type=int, default=None)
    sk.add_argument("--replicates", type=int, default=None)
    sk.add_argument("--profile", choices=sorted(PROFILES), default="full")
    output_options(sk)

    glm = which.add_parser("glm", help="synthetic binary regression with a gold standard")
    glm.add_argument("--n", type=int, default=190)
    glm.add_argument("--q", type=int, default=5)
    glm.add_argument("--link", choices=LINKS, default="logit")
    glm.add_argument("--s", type=int, default=10_000)
    glm.add_argument("--gs-draws", type=int, default=100_000)
    glm.add_argument("--replicates", type=int, default=1)
    output_options(glm)

    est = sub.add_parser("estimate", help="one estimate for a target described in JSON")
    est.add_argument("--target-spec", type=Path, required=True)
    est.add_argument("--method", type=str.upper, choices=METHODS, required=True)
    est.add_argument("--s", type=int, default=10_000)
    est.add_argument("--S", type=int, default=None)
    est.add_argument("--seed", type=int, default=0)
    return parser


def _bench_skewt(args) -> int:
    overrides = {"nu_list": args.nu, "delta_list": args.delta, "k_list": args.k, "s": args.s,
                 "S": args.S, "replicates": args.replicates, "master_seed": args.seed}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    config = BenchmarkConfig.profile(args.profile, methods=tuple(args.methods), **overrides)
    report = run_benchmark(config, workers=args.threads)
    return _write(report, args)


def _bench_glm(args) -> int:
    report = run_glm_demo(0 if args.seed is None else args.seed, args.n, args.q, args.link, args.methods,
                          s=args.s, replicates=args.replicates, gs_draws=args.gs_draws, workers=args.threads)
    return _write(report, args)


def _write(report, args) -> int:
    text = render_report(report, args.format)
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return EXIT_PARTIAL if report.failed else EXIT_OK


def load_target(spec: dict):
    """Build ``(target, sampler)`` from a JSON target description."""
    kind = spec.get("kind")
    if kind == "skewt":
        target = make_skewt_target(int(spec["k"]), float(spec["nu"]), float(spec.get("delta1", 0.0)))
        return target, lambda rng, n, mode: target.sampler(rng, n)
    if kind == "glm":
        _, target, _ = make_glm_target(np.random.default_rng(int(spec.get("seed", 0))), int(spec["n"]),
                                       int(spec["q"]), spec.get("link", "logit"),
                                       float(spec.get("prior_sd", 2.5)))

        def sampler(rng, n, mode):
            return rw_metropolis(rng, target, mode, n + n // 5, n // 5).samples
        return target, sampler
    raise ValueError(f"target kind must be 'skewt' or 'glm', got {kind!r}")


def _estimate(args) -> int:
    target, sampler = load_target(json.loads(args.target_spec.read_text()))
    mode = find_mode(target)
    samples = None
    if args.method not in ("L1", "CL1"):
        samples = sampler(derive_rng(args.seed, "posterior"), args.s, mode)
    value, diag = estimate(args.method, target, derive_rng(args.seed, args.method), mode=mode,
                           samples=samples, S=args.S or args.s)
    out = {"target": target.name, "method": args.method, "log_ml": value, "diagnostics": diag}
    if target.true_log_z is not None:
        out["true_log_z"] = target.true_log_z
    print(json.dumps(out, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "estimate":
            return _estimate(args)
        return _bench_skewt(args) if args.target == "skewt" else _bench_glm(args)
    except (ValueError, KeyError, OSError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"evidencia: error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
