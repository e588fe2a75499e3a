"""
Trace CSV output.

This module writes iterate traces to the TraceCsv format
(iter,f,step_norm,M,ls_doublings,sub_gap,sub_iters,stat_surrogate,time_ms)
and reads them back for audits.
"""

import logging
from pathlib import Path
from typing import Union

import pandas as pd

from ..solvers.results import IterateTrace, IterationRecord, TRACE_COLUMNS


logger = logging.getLogger(__name__)

# 17 significant digits round-trip float64 exactly
FLOAT_FORMAT = '%.17g'

_INTEGER_COLUMNS = ('iter', 'ls_doublings', 'sub_iters')


class TraceWriteError(OSError):
    """Raised when a trace file cannot be written; carries the target path."""

    def __init__(self, path: Union[str, Path], reason: str):
        super().__init__(f"Failed to write trace CSV {path}: {reason}")
        self.path = str(path)


def trace_to_frame(trace: IterateTrace) -> pd.DataFrame:
    """
    Convert a trace to a DataFrame with TraceCsv columns.

    Args:
        trace: Iterate trace

    Returns:
        DataFrame with one row per record, integer columns kept integral
    """
    frame = pd.DataFrame(
        [[getattr(record, name) for name in TRACE_COLUMNS] for record in trace],
        columns=list(TRACE_COLUMNS),
    )
    for name in TRACE_COLUMNS:
        frame[name] = frame[name].astype('int64' if name in _INTEGER_COLUMNS else 'float64')
    return frame


def write_trace_csv(trace: IterateTrace, path: Union[str, Path]) -> None:
    """
    Write a trace to CSV.

    The output is UTF-8 with LF line endings and depends only on the trace
    contents. An empty trace yields a header-only file.

    Args:
        trace: Iterate trace
        path: Output file path (parent directories are created)

    Raises:
        TraceWriteError: If the file cannot be written
    """
    output_file = Path(path)
    frame = trace_to_frame(trace)

    try:
        output_file.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(output_file, index=False, float_format=FLOAT_FORMAT,
                     lineterminator='\n', encoding='utf-8')
    except OSError as e:
        logger.error(f"Failed to write trace {output_file}: {e}")
        raise TraceWriteError(output_file, str(e)) from e

    logger.info(f"Wrote {len(frame)} trace rows to {output_file}")


def read_trace_csv(path: Union[str, Path]) -> IterateTrace:
    """
    Read a TraceCsv file back into an IterateTrace.

    Args:
        path: CSV file path

    Returns:
        IterateTrace with the file's rows

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the header does not match the TraceCsv columns
    """
    input_file = Path(path)
    if not input_file.exists():
        raise FileNotFoundError(f"Trace CSV not found: {input_file}")

    frame = pd.read_csv(input_file, float_precision='round_trip')
    if tuple(frame.columns) != TRACE_COLUMNS:
        raise ValueError(f"Unexpected trace header {list(frame.columns)}, "
                         f"expected {list(TRACE_COLUMNS)}")

    trace = IterateTrace()
    for row in frame.itertuples(index=False):
        values = row._asdict()
        trace.append(IterationRecord(**{
            name: int(values[name]) if name in _INTEGER_COLUMNS else float(values[name])
            for name in TRACE_COLUMNS
        }))
    return trace
