"""
Recovery experiments on the IEEE cases.

These run the full solvers from random feasible starts and take minutes;
select them with ``pytest -m slow``. Targets and starts are drawn from the
sampling sub-box of C (angles within ±0.2 rad).
"""

import pytest

from src.diagnostics.kl_rate import LINEAR, STALLED, SUBLINEAR
from src.experiment.runner import ExperimentConfig, ExperimentRunner, seed_sweep
from src.output.summary_exporter import aggregate
from src.solvers.mpgn import MpgnConfig
from src.solvers.pgd import PgdConfig

pytestmark = pytest.mark.slow

SEEDS = list(range(1, 11))


@pytest.fixture(scope="module")
def runner(tmp_path_factory):
    path = tmp_path_factory.mktemp("config") / "settings.ini"
    path.write_text("[OUTPUT]\njson_indent = 2\n")
    return ExperimentRunner(str(path))


def sweep(runner, tmp_path, case, solver, merit_tol=1e-3):
    base = ExperimentConfig(case=case, solver=solver, output_dir=str(tmp_path),
                            mpgn=MpgnConfig(accelerated=True, merit_tol=merit_tol),
                            pgd=PgdConfig(merit_tol=merit_tol), timed=False)
    return runner.run_batch(seed_sweep(base, SEEDS), workers=4)


def test_case14_recovery(runner, tmp_path):
    reports = sweep(runner, tmp_path, "case14", "mpgn")
    converged = [r for r in reports if r.solvers["mpgn"].converged]
    assert len(converged) >= 9
    assert all(r.solvers["mpgn"].descent_violations == 0 for r in reports)
    assert all(r.solvers["mpgn"].final_merit <= 1e-3 for r in converged)


@pytest.mark.parametrize("case", ["case14", "case57"])
def test_fewer_iterations_than_gradient_descent(runner, tmp_path, case):
    summary = aggregate(sweep(runner, tmp_path, case, "both"))
    assert summary["mpgn_faster"] >= 7
    if summary.get("both_converged"):
        assert summary["mpgn_fewer_iterations"] >= 0.7 * summary["both_converged"]


def test_case14_rate_classification(runner, tmp_path):
    reports = sweep(runner, tmp_path, "case14", "mpgn", merit_tol=1e-9)
    converged = [r.solvers["mpgn"] for r in reports if r.solvers["mpgn"].converged]
    assert converged
    assert all(s.rate_regime != STALLED for s in converged)
    assert any(s.rate_regime in (LINEAR, SUBLINEAR) for s in converged)
