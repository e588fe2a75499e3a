"""
Solver result types.

This module defines the per-iteration record, the iterate trace and the
result object returned by the outer solvers.
"""

from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Iterator, List, Tuple

import numpy as np


class SolveStatus(str, Enum):
    """Why an outer solver stopped."""
    MERIT_CONVERGED = 'merit-converged'
    STEP_CONVERGED = 'step-converged'
    MAX_ITERS = 'max-iters'
    SUBPROBLEM_FAILURE = 'subproblem-failure'


@dataclass(frozen=True)
class IterationRecord:
    """
    One row of an iterate trace, describing the state x_k.

    Row 0 is the starting point; for k ≥ 1 the step and line-search fields
    describe the move from x_{k-1} to x_k.

    Attributes:
        iter: Outer iteration index k
        f: Merit value ‖F(x_k)‖
        step_norm: ‖x_k − x_{k-1}‖ (0 at k = 0)
        M: Accepted regularization (PGD stores 1/α)
        ls_doublings: Line-search doublings (PGD stores backtracking halvings)
        sub_gap: Duality gap of the accepted subproblem solve
        sub_iters: Inner iterations of the accepted subproblem solve
        stat_surrogate: Stationarity surrogate for the step
        time_ms: Cumulative wall time in milliseconds
    """
    iter: int
    f: float
    step_norm: float = 0.0
    M: float = 0.0
    ls_doublings: int = 0
    sub_gap: float = 0.0
    sub_iters: int = 0
    stat_surrogate: float = 0.0
    time_ms: float = 0.0


TRACE_COLUMNS: Tuple[str, ...] = tuple(f.name for f in fields(IterationRecord))


@dataclass
class IterateTrace:
    """
    Ordered iteration records of one solve.

    Attributes:
        records: Records with iter strictly increasing from 0
        initial_projection: Distance the start point moved when projected onto C
    """
    records: List[IterationRecord] = field(default_factory=list)
    initial_projection: float = 0.0

    def append(self, record: IterationRecord) -> None:
        expected = len(self.records)
        if record.iter != expected:
            raise ValueError(f"Trace expects iteration {expected}, got {record.iter}")
        values = np.array([record.f, record.step_norm, record.M, record.sub_gap,
                           record.stat_surrogate, record.time_ms])
        if not np.all(np.isfinite(values)):
            raise ValueError(f"Non-finite entry in trace record {record}")
        self.records.append(record)

    def column(self, name: str) -> np.ndarray:
        if name not in TRACE_COLUMNS:
            raise KeyError(f"Unknown trace column '{name}'")
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def merit_values(self) -> np.ndarray:
        return self.column('f')

    @property
    def iterations(self) -> int:
        """Number of outer steps taken (rows minus the starting row)."""
        return max(len(self.records) - 1, 0)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[IterationRecord]:
        return iter(self.records)


@dataclass
class SolveResult:
    """
    Result of an outer solve.

    Attributes:
        x_final: Last iterate (feasible)
        status: Stopping reason
        trace: Iterate trace
        flags: Free-form markers such as 'step-underflow' or 'subproblem-retry'
    """
    x_final: np.ndarray
    status: SolveStatus
    trace: IterateTrace
    flags: List[str] = field(default_factory=list)

    @property
    def final_merit(self) -> float:
        return self.trace.records[-1].f if self.trace.records else float('nan')

    @property
    def iterations(self) -> int:
        return self.trace.iterations

    @property
    def converged(self) -> bool:
        return self.status == SolveStatus.MERIT_CONVERGED


def descent_audit(trace: IterateTrace, delta: float, slack: float = 1e-9) -> List[int]:
    """
    Check the sufficient-decrease inequality on every step of a trace.

    (δ/2)‖x_k − x_{k-1}‖² ≤ f_{k-1} − f_k + slack must hold for k ≥ 1.

    Args:
        trace: MPG-N iterate trace
        delta: Descent margin the solve used
        slack: Absolute slack for rounding

    Returns:
        Iteration indices violating the inequality (empty when the trace passes)
    """
    f = trace.merit_values
    steps = trace.column('step_norm')
    violations = []
    for k in range(1, len(f)):
        if 0.5 * delta * steps[k] ** 2 > f[k - 1] - f[k] + slack:
            violations.append(k)
    return violations
