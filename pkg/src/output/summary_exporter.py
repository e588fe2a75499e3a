"""
Summary output for benchmark experiments.

This module defines the per-run summary types and writes them as plain
text, as a single-line key=value record and as JSON.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from ..utils.settings import load_settings


# Field order of the key=value record; changing it changes the schema.
SOLVER_RECORD_KEYS = (
    'status', 'converged', 'iterations', 'final_merit', 'wall_time_ms',
    'ls_doublings_total', 'ls_doublings_max', 'initial_projection',
    'distance_to_xstar', 'rate_regime', 'rate', 'rate_r2', 'descent_violations',
)


@dataclass
class SolverSummary:
    """
    Outcome of one solver within an experiment.

    Attributes:
        solver: mpgn or pgd
        status: Stopping reason
        converged: Whether the merit tolerance was reached
        iterations: Outer iterations performed
        final_merit: ‖F(x_final)‖
        wall_time_ms: Total wall time (0 when timing is disabled)
        ls_doublings_total: Sum of line-search doublings (PGD: halvings)
        ls_doublings_max: Largest per-iteration count
        initial_projection: Distance the start point moved onto C
        distance_to_xstar: ‖x_final − x*‖
        rate_regime: Rate-fit regime of the merit trace
        rate: Rate-fit contraction factor or exponent
        rate_r2: Rate-fit r²
        descent_violations: Iterations failing the sufficient-decrease audit
            of the CSV trace (-1 when not audited)
        trace_path: Written trace CSV
        flags: Solver flags
    """
    solver: str
    status: str
    converged: bool
    iterations: int
    final_merit: float
    wall_time_ms: float
    ls_doublings_total: int
    ls_doublings_max: int
    initial_projection: float
    distance_to_xstar: float
    rate_regime: str
    rate: float
    rate_r2: float
    descent_violations: int = -1
    trace_path: str = ""
    flags: List[str] = field(default_factory=list)


@dataclass
class SummaryReport:
    """
    Summary of one experiment.

    Attributes:
        case: Case label
        seed: Experiment seed
        xstar: Target-state mode
        start: Start-point mode
        merit_tol: Stopping tolerance on ‖F‖
        solvers: Per-solver summaries in run order
    """
    case: str
    seed: int
    xstar: str
    start: str
    merit_tol: float
    solvers: Dict[str, SolverSummary] = field(default_factory=dict)

    @property
    def iteration_ratio(self) -> Optional[float]:
        """
        PGD iterations over MPG-N iterations.

        None when only one solver ran, or when MPG-N took no iterations
        while PGD took some. Two zero-iteration runs give 1.0.
        """
        if 'mpgn' not in self.solvers or 'pgd' not in self.solvers:
            return None
        mpgn_iters = self.solvers['mpgn'].iterations
        pgd_iters = self.solvers['pgd'].iterations
        if mpgn_iters == 0:
            return 1.0 if pgd_iters == 0 else None
        return pgd_iters / mpgn_iters

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['iteration_ratio'] = self.iteration_ratio
        return data


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def to_record(report: SummaryReport) -> str:
    """
    Single-line key=value record.

    Keys appear as case, seed, xstar, start, merit_tol, then
    <solver>.<key> for each solver in run order (keys in SOLVER_RECORD_KEYS
    order), then iteration_ratio when both solvers ran.

    Args:
        report: Experiment summary

    Returns:
        Record line without a trailing newline
    """
    items = [
        ('case', report.case),
        ('seed', report.seed),
        ('xstar', report.xstar),
        ('start', report.start),
        ('merit_tol', float(report.merit_tol)),
    ]
    for name, summary in report.solvers.items():
        items.extend((f"{name}.{key}", getattr(summary, key)) for key in SOLVER_RECORD_KEYS)
    if report.iteration_ratio is not None:
        items.append(('iteration_ratio', float(report.iteration_ratio)))
    return ' '.join(f"{key}={_format_value(value)}" for key, value in items)


def to_text(report: SummaryReport) -> str:
    """Human-readable multi-line summary."""
    lines = [
        f"Experiment: {report.case}, seed {report.seed}",
        f"  x*: {report.xstar}, start: {report.start}, tolerance ‖F‖ ≤ {report.merit_tol:g}",
    ]
    for name, s in report.solvers.items():
        lines.append(f"  [{name}] {s.status} after {s.iterations} iterations")
        lines.append(f"    final ‖F‖ = {s.final_merit:.6e}, wall time {s.wall_time_ms:.1f} ms")
        lines.append(f"    line search: {s.ls_doublings_total} total, {s.ls_doublings_max} max per iteration")
        lines.append(f"    ‖x − x*‖ = {s.distance_to_xstar:.6e}, start projection {s.initial_projection:.3e}")
        lines.append(f"    rate fit: {s.rate_regime} (rate {s.rate:.6g}, r² {s.rate_r2:.4f})")
        if s.descent_violations >= 0:
            verdict = "pass" if s.descent_violations == 0 else f"{s.descent_violations} violations"
            lines.append(f"    descent audit: {verdict}")
        if s.flags:
            lines.append(f"    flags: {', '.join(s.flags)}")
        lines.append(f"    trace: {s.trace_path}")
    if report.iteration_ratio is not None:
        lines.append(f"  PGD / MPG-N iterations: {report.iteration_ratio:.3f}")
    return '\n'.join(lines)


def aggregate(reports: Sequence[SummaryReport]) -> Dict[str, Any]:
    """
    Combine a seed sweep into counts.

    Args:
        reports: Experiment summaries, one per seed

    Returns:
        Dict with the run count, converged counts per solver and, when both
        solvers ran, how often MPG-N needed strictly fewer iterations among
        seeds where both converged (mpgn_fewer_iterations) and how often it
        reached the tolerance in fewer iterations than PGD, counting a PGD
        run that never converged as slower (mpgn_faster)
    """
    result: Dict[str, Any] = {'runs': len(reports), 'converged': {}}
    for report in reports:
        for name, summary in report.solvers.items():
            result['converged'].setdefault(name, 0)
            result['converged'][name] += int(summary.converged)

    both = [r for r in reports
            if 'mpgn' in r.solvers and 'pgd' in r.solvers
            and r.solvers['mpgn'].converged and r.solvers['pgd'].converged]
    if both:
        result['both_converged'] = len(both)
        result['mpgn_fewer_iterations'] = sum(
            r.solvers['mpgn'].iterations < r.solvers['pgd'].iterations for r in both)

    compared = [r for r in reports if 'mpgn' in r.solvers and 'pgd' in r.solvers]
    if compared:
        result['mpgn_faster'] = sum(_mpgn_faster(r) for r in compared)
    return result


def _mpgn_faster(report: SummaryReport) -> bool:
    mpgn, pgd = report.solvers['mpgn'], report.solvers['pgd']
    if not mpgn.converged:
        return False
    return not pgd.converged or mpgn.iterations < pgd.iterations


class SummaryExporter:
    """
    Writes experiment summaries to an output directory.

    Each experiment produces <stem>.txt (human-readable), <stem>.json and a
    line appended to summary.records.
    """

    def __init__(self, config_path: str = "settings.ini"):
        """
        Initialize the exporter with configuration.

        Args:
            config_path: Path to the configuration file
        """
        self.logger = logging.getLogger(__name__)
        self.config = load_settings(config_path)
        self.indent = self.config.getint('OUTPUT', 'json_indent', fallback=2)

    def export(self, report: SummaryReport, output_dir: str, stem: str) -> Path:
        """
        Write one experiment summary.

        Args:
            report: Experiment summary
            output_dir: Target directory (created if missing)
            stem: File name stem, e.g. case14_seed1

        Returns:
            Path of the text summary
        """
        directory = Path(output_dir)
        directory.mkdir(parents=True, exist_ok=True)
        text_path = directory / f"{stem}.txt"
        json_path = directory / f"{stem}.json"

        try:
            text_path.write_text(to_text(report) + '\n', encoding='utf-8')
            with open(json_path, 'w', encoding='utf-8', newline='\n') as f:
                json.dump(report.to_dict(), f, indent=self.indent)
            self.logger.info(f"Wrote summary {text_path} and {json_path}")
        except OSError as e:
            self.logger.error(f"Failed to write summary for {stem}: {e}")
            raise

        return text_path

    def export_records(self, reports: Sequence[SummaryReport], output_dir: str) -> Path:
        """
        Write one key=value record per experiment plus the sweep aggregate.

        Args:
            reports: Experiment summaries in seed order
            output_dir: Target directory

        Returns:
            Path of summary.records
        """
        directory = Path(output_dir)
        directory.mkdir(parents=True, exist_ok=True)
        records_path = directory / "summary.records"
        aggregate_path = directory / "aggregate.json"

        try:
            with open(records_path, 'w', encoding='utf-8', newline='\n') as f:
                for report in reports:
                    f.write(to_record(report) + '\n')
            with open(aggregate_path, 'w', encoding='utf-8', newline='\n') as f:
                json.dump(aggregate(reports), f, indent=self.indent)
            self.logger.info(f"Wrote {len(reports)} summary records to {records_path}")
        except OSError as e:
            self.logger.error(f"Failed to write summary records in {directory}: {e}")
            raise

        return records_path
