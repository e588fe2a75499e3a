"""
Tests for the command-line entry point.
"""

import logging
import sys

import numpy as np
import pytest

import main
from src.experiment import runner as runner_module
from src.models.residual import merit_value
from src.solvers.results import IterateTrace, IterationRecord, SolveResult, SolveStatus

from .conftest import CASES_DIR


@pytest.fixture
def settings_file(tmp_path):
    path = tmp_path / "settings.ini"
    path.write_text(f"[DATA]\ncase_dir = {CASES_DIR}\n\n[MPGN]\nmax_outer = 60\n\n"
                    f"[PGD]\nmax_outer = 60\n")
    return str(path)


def failing_mpgn(model, box, x0, cfg=None, clock=None):
    trace = IterateTrace()
    trace.append(IterationRecord(iter=0, f=merit_value(model, x0)))
    return SolveResult(np.asarray(x0, dtype=float), SolveStatus.SUBPROBLEM_FAILURE, trace,
                       ['subproblem-retry'])


def run_main(monkeypatch, settings_file, out_dir, *extra):
    argv = ["main.py", "--config", settings_file, "--case", "case2", "--solver", "mpgn",
            "--out", str(out_dir), *extra]
    monkeypatch.setattr(sys, "argv", argv)
    main.main()


def test_subproblem_failure_exits_nonzero(monkeypatch, tmp_path, settings_file, caplog):
    monkeypatch.setattr(runner_module, "solve_mpgn", failing_mpgn)
    with caplog.at_level(logging.ERROR), pytest.raises(SystemExit) as excinfo:
        run_main(monkeypatch, settings_file, tmp_path / "out")
    assert excinfo.value.code == 1
    assert "case2_seed1/mpgn" in caplog.text
    assert (tmp_path / "out" / "case2_seed1_mpgn.csv").exists()


def test_subproblem_failure_in_sweep_exits_nonzero(monkeypatch, tmp_path, settings_file):
    monkeypatch.setattr(runner_module, "solve_mpgn", failing_mpgn)
    with pytest.raises(SystemExit) as excinfo:
        run_main(monkeypatch, settings_file, tmp_path / "out", "--seeds", "1-2")
    assert excinfo.value.code == 1


def test_clean_run_returns_normally(monkeypatch, tmp_path, settings_file, capsys):
    run_main(monkeypatch, settings_file, tmp_path / "out", "--xstar", "flat", "--start", "flat")
    assert "mpgn.status=merit-converged" in capsys.readouterr().out


@pytest.mark.parametrize("spread", ["0", "4"])
def test_angle_spread_out_of_range(monkeypatch, tmp_path, settings_file, spread):
    with pytest.raises(SystemExit) as excinfo:
        run_main(monkeypatch, settings_file, tmp_path / "out", "--angle-spread", spread)
    assert excinfo.value.code == 1


def test_failed_runs_lists_only_failures(tmp_path, settings_file):
    reports = runner_module.ExperimentRunner(settings_file).run_batch(
        [runner_module.ExperimentConfig(case="case2", solver="both", xstar="flat", start="flat",
                                        output_dir=str(tmp_path), timed=False)])
    assert main.failed_runs(reports) == []

    reports[0].solvers["pgd"].status = SolveStatus.SUBPROBLEM_FAILURE.value
    assert main.failed_runs(reports) == ["case2_seed1/pgd"]
