"""
Tests for trace CSV output.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.output.trace_writer import TraceWriteError, read_trace_csv, write_trace_csv
from src.solvers.results import IterateTrace, IterationRecord, TRACE_COLUMNS

HEADER = "iter,f,step_norm,M,ls_doublings,sub_gap,sub_iters,stat_surrogate,time_ms"


def make_trace(iterations, seed=0):
    rng = np.random.default_rng(seed)
    trace = IterateTrace()
    f = 10.0
    trace.append(IterationRecord(iter=0, f=f))
    for k in range(1, iterations + 1):
        f *= rng.uniform(0.1, 0.9)
        trace.append(IterationRecord(
            iter=k, f=f, step_norm=rng.uniform() / 3, M=2.0 ** -k, ls_doublings=k % 3,
            sub_gap=rng.uniform() * 1e-11, sub_iters=int(rng.integers(1, 500)),
            stat_surrogate=np.pi / k, time_ms=0.1 * k,
        ))
    return trace


def test_header_matches_columns():
    assert ",".join(TRACE_COLUMNS) == HEADER


def test_empty_trace_writes_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    write_trace_csv(IterateTrace(), path)
    assert path.read_text() == HEADER + "\n"


def test_three_iterations(tmp_path):
    path = tmp_path / "trace.csv"
    write_trace_csv(make_trace(3), path)
    lines = path.read_text().splitlines()
    assert lines[0] == HEADER
    assert len(lines) == 5
    assert [line.split(",")[0] for line in lines[1:]] == ["0", "1", "2", "3"]


def test_three_records_give_four_lines(tmp_path):
    path = tmp_path / "trace.csv"
    write_trace_csv(make_trace(2), path)
    assert len(path.read_text().splitlines()) == 4


def test_line_endings_and_encoding(tmp_path):
    path = tmp_path / "trace.csv"
    write_trace_csv(make_trace(4), path)
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.endswith(b"\n")
    raw.decode("utf-8")


def test_round_trip(tmp_path):
    trace = make_trace(25, seed=3)
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    again = read_trace_csv(path)

    assert len(again) == len(trace)
    for name in TRACE_COLUMNS:
        assert_allclose(again.column(name), trace.column(name), rtol=1e-12, atol=0)
    assert all(isinstance(r.sub_iters, int) for r in again)


def test_output_is_deterministic(tmp_path):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    write_trace_csv(make_trace(10, seed=7), first)
    write_trace_csv(make_trace(10, seed=7), second)
    assert first.read_bytes() == second.read_bytes()


def test_creates_parent_directories(tmp_path):
    path = tmp_path / "nested" / "deeper" / "trace.csv"
    write_trace_csv(make_trace(1), path)
    assert path.exists()


def test_unwritable_path(tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    target = blocker / "trace.csv"
    with pytest.raises(TraceWriteError) as info:
        write_trace_csv(make_trace(1), target)
    assert info.value.path == str(target)


def test_read_rejects_foreign_header(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("time,open,high,low,close\n1,2,3,4,5\n")
    with pytest.raises(ValueError, match="Unexpected trace header"):
        read_trace_csv(path)


def test_read_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_trace_csv(tmp_path / "missing.csv")


def test_trace_rejects_out_of_order_rows():
    trace = IterateTrace()
    trace.append(IterationRecord(iter=0, f=1.0))
    with pytest.raises(ValueError, match="expects iteration 1"):
        trace.append(IterationRecord(iter=2, f=0.5))


def test_trace_rejects_non_finite():
    with pytest.raises(ValueError, match="Non-finite"):
        IterateTrace().append(IterationRecord(iter=0, f=float("nan")))
