import csv
import io
import json

import numpy as np
import pytest

from evidencia import harness
from evidencia.harness import (BenchmarkConfig, BenchmarkReport, CellResult, derive_rng, emit_report, format_cell,
                               load_report, render_report, run_benchmark, run_glm_demo)

SMALL = dict(nu_list=(10.0,), delta_list=(0.0, 0.5), k_list=(2,), s=400, S=400, replicates=3, master_seed=7)


@pytest.fixture(scope="module")
def small_report():
    return run_benchmark(BenchmarkConfig(**SMALL), workers=1)


def test_config_validation():
    with pytest.raises(ValueError):
        BenchmarkConfig(k_list=())
    with pytest.raises(ValueError):
        BenchmarkConfig(methods=("L1", "XX"))
    with pytest.raises(ValueError):
        BenchmarkConfig(replicates=0)
    with pytest.raises(ValueError):
        BenchmarkConfig(s=50)
    desk = BenchmarkConfig.profile("desk")
    assert (desk.s, desk.S, desk.replicates) == (5000, 5000, 10)
    assert len(BenchmarkConfig().cells()) == 18


def test_seed_streams_are_keyed():
    a = derive_rng(1, "x", 2).random(3)
    np.testing.assert_array_equal(a, derive_rng(1, "x", 2).random(3))
    assert not np.array_equal(a, derive_rng(1, "x", 3).random(3))
    assert not np.array_equal(a, derive_rng(2, "x", 2).random(3))


def test_report_shape(small_report):
    assert len(small_report.results) == 2 * 7
    l1 = small_report.lookup("L1", nu=10.0, delta1=0.0, k=2)
    assert l1.replicates == 1 and l1.sd is None
    assert l1.mean == pytest.approx(-0.18, abs=0.02)
    cl2 = small_report.lookup("CL2", nu=10.0, delta1=0.5, k=2)
    assert cl2.replicates == 3 and cl2.sd is not None and cl2.sd > 0
    assert cl2.sd == pytest.approx(np.std(cl2.values, ddof=1))
    assert not small_report.failed


def test_methods_share_posterior_draws(small_report):
    digests = small_report.diagnostics["sample_digests"]
    assert set(digests) == {"nu=10,delta1=0,k=2", "nu=10,delta1=0.5,k=2"}
    for reps in digests.values():
        assert len(set(reps)) == 3  # one distinct sample per replicate


def test_adding_a_method_leaves_other_streams_alone():
    a = run_benchmark(BenchmarkConfig(**{**SMALL, "methods": ("L2",)}), workers=1)
    b = run_benchmark(BenchmarkConfig(**{**SMALL, "methods": ("L2", "CL2")}), workers=1)
    assert a.lookup("L2", delta1=0.5).values == b.lookup("L2", delta1=0.5).values


def test_json_is_byte_identical_across_runs_and_workers(small_report):
    again = run_benchmark(BenchmarkConfig(**SMALL), workers=2)
    assert render_report(small_report, "json") == render_report(again, "json")


def test_deterministic_methods_only():
    cfg = BenchmarkConfig(**{**SMALL, "methods": ("L1", "CL1"), "replicates": 1})
    first, second = run_benchmark(cfg, workers=1), run_benchmark(cfg, workers=1)
    assert first.to_json() == second.to_json()
    assert first.diagnostics["sample_digests"] == {}


def test_laplace_bridge_on_near_gaussian_cell():
    cfg = BenchmarkConfig(nu_list=(1e6,), delta_list=(0.0,), k_list=(3,), methods=("LB",), s=2000, S=2000,
                          replicates=3, master_seed=3)
    cell = run_benchmark(cfg, workers=1).results[0]
    assert abs(cell.mean) < 0.01


def test_json_round_trip(small_report, tmp_path):
    path = emit_report(small_report, "json", tmp_path / "r.json")
    assert load_report(path) == small_report
    data = json.loads(path.read_text())
    assert all("values" in r for r in data["results"])


def test_csv_columns(small_report):
    rows = list(csv.reader(io.StringIO(render_report(small_report, "csv"))))
    assert rows[0] == ["nu", "delta1", "k", "method", "mean", "sd", "replicates", "seconds", "note"]
    assert len(rows) == 1 + len(small_report.results)
    l1 = next(r for r in rows if r[3] == "L1")
    assert l1[5] == ""  # no spread for a single deterministic value


def test_markdown_cell_style():
    cell = CellResult({"nu": 3.0, "delta1": 0.0, "k": 2}, "CL2", [0.18, 0.20, 0.22])
    assert format_cell(cell) == "0.20 (0.02)"
    assert format_cell(CellResult({}, "L1", [-0.511])) == "-0.51"
    assert format_cell(CellResult({}, "TC", [], ["ValueError: boom"])) == "NA"


def test_failures_are_recorded_and_rendered(monkeypatch):
    real = harness.estimate

    def flaky(method, *args, **kwargs):
        if method == "TC":
            raise ValueError("synthetic failure")
        return real(method, *args, **kwargs)

    monkeypatch.setattr(harness, "estimate", flaky)
    cfg = BenchmarkConfig(**{**SMALL, "methods": ("L2", "TC"), "delta_list": (0.0,), "replicates": 2})
    report = run_benchmark(cfg, workers=1)
    tc = report.lookup("TC")
    assert report.failed and tc.mean is None and len(tc.errors) == 2
    md = render_report(report, "markdown")
    assert "| 10 | TC | NA |" in md and "synthetic failure" in md
    assert report.lookup("L2").mean is not None


def test_output_path_written(tmp_path):
    path = tmp_path / "out.csv"
    run_benchmark(BenchmarkConfig(**{**SMALL, "methods": ("L1",), "output_path": str(path)}), workers=1)
    assert path.read_text().startswith("nu,delta1,k,method")


def test_glm_demo_small():
    report = run_glm_demo(1, n=60, q=3, methods=("L1", "L2", "LB"), s=1000, replicates=2, gs_draws=4000)
    gs = report.lookup("GS")
    assert gs.mean is not None and report.lookup("L2").replicates == 2
    assert abs(report.lookup("LB").mean - gs.mean) < 0.1
    assert len(report.diagnostics["acceptance"]) == 2
    assert "| GS |" in render_report(report, "markdown")


def test_glm_demo_deterministic_methods_skip_sampling(monkeypatch):
    def forbidden(*args, **kwargs):
        raise AssertionError("sampler should not run")

    monkeypatch.setattr(harness, "rw_metropolis", forbidden)
    report = run_glm_demo(2, n=60, q=3, methods=("L1",))
    assert [r.method for r in report.results] == ["L1"]
    assert report.lookup("L1").mean is not None


def test_worker_count_respects_env(monkeypatch):
    monkeypatch.setenv("EVIDENCIA_THREADS", "1")
    assert harness.worker_count() == 1
    monkeypatch.setenv("EVIDENCIA_THREADS", "lots")
    assert harness.worker_count() >= 1
