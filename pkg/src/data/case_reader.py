"""
MATPOWER case reader.

This module parses the subset of the MATPOWER case format needed for
admittance assembly (mpc.baseMVA, mpc.bus, mpc.branch), loads the IEEE
cases bundled with PYPOWER, and assembles the bus admittance matrix.
"""

import importlib
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pypower import idx_brch, idx_bus

from ..utils.settings import load_settings
from .data_models import BranchRecord, BusRecord, CaseData


logger = logging.getLogger(__name__)

BUILTIN_CASES = ('case14', 'case39', 'case57', 'case118')

_ASSIGNMENT = re.compile(r'^mpc\.(\w+)\s*=\s*(.*)$')

# minimal column counts: bus through BS, branch through BR_B
_MIN_BUS_COLUMNS = idx_bus.BS + 1
_MIN_BRANCH_COLUMNS = idx_brch.BR_B + 1


class CaseParseError(ValueError):
    """Raised when case text cannot be parsed; carries the offending line."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        location = f"line {line_number}: " if line_number is not None else ""
        super().__init__(f"{location}{message}")
        self.line_number = line_number


def parse_matpower_case(text: str, name: str = "case") -> CaseData:
    """
    Parse MATPOWER case text into CaseData.

    Comments (%) and trailing semicolons are tolerated; tables other than
    bus and branch, and columns beyond those consumed, are ignored.

    Args:
        text: Contents of a MATPOWER .m case file
        name: Case label

    Returns:
        CaseData with buses renumbered to 1..N in table order

    Raises:
        CaseParseError: Missing table, ragged rows, non-numeric entries or a
            branch referencing an unknown bus
    """
    base_mva = None
    tables: Dict[str, Tuple[int, List[Tuple[int, List[str]]]]] = {}
    current = None
    current_line = 0
    rows: List[Tuple[int, List[str]]] = []
    lines = text.splitlines()

    for line_number, raw in enumerate(lines, start=1):
        line = raw.split('%', 1)[0].strip()
        if not line:
            continue

        if current is None:
            match = _ASSIGNMENT.match(line)
            if not match:
                continue
            key, rest = match.group(1), match.group(2).strip()
            if key == 'baseMVA':
                try:
                    base_mva = float(rest.rstrip(';').strip())
                except ValueError:
                    raise CaseParseError(f"Invalid baseMVA value '{rest}'", line_number)
                continue
            if not rest.startswith('['):
                continue
            current, current_line, rows = key, line_number, []
            line = rest[1:]

        closed = ']' in line
        if closed:
            line = line.split(']', 1)[0]

        for chunk in line.split(';'):
            values = chunk.replace(',', ' ').split()
            if values:
                rows.append((line_number, values))

        if closed:
            tables[current] = (current_line, rows)
            current = None

    if current is not None:
        raise CaseParseError(f"Table mpc.{current} is never closed", current_line)

    end_line = len(lines)
    if base_mva is None:
        raise CaseParseError("Missing mpc.baseMVA assignment", end_line)
    for key in ('bus', 'branch'):
        if key not in tables:
            raise CaseParseError(f"Missing mpc.{key} table", end_line)

    bus_rows, bus_lines = _numeric_table('bus', tables['bus'][1])
    branch_rows, branch_lines = _numeric_table('branch', tables['branch'][1])

    case = case_from_tables(base_mva, bus_rows, branch_rows, name=name,
                            bus_lines=bus_lines, branch_lines=branch_lines)
    logger.info(f"Parsed {name}: {case.n_bus} buses, {len(case.branches)} branches")
    return case


def _numeric_table(key: str, rows: List[Tuple[int, List[str]]]):
    if not rows:
        return np.zeros((0, 0)), []

    width = len(rows[0][1])
    values, line_numbers = [], []
    for line_number, tokens in rows:
        if len(tokens) != width:
            raise CaseParseError(
                f"Ragged mpc.{key} row: {len(tokens)} columns, expected {width}", line_number)
        try:
            values.append([float(tok) for tok in tokens])
        except ValueError as e:
            raise CaseParseError(f"Non-numeric entry in mpc.{key}: {e}", line_number)
        line_numbers.append(line_number)

    return np.array(values), line_numbers


def case_from_tables(base_mva: float, bus_table, branch_table, name: str = "case",
                     bus_lines: Optional[Sequence[int]] = None,
                     branch_lines: Optional[Sequence[int]] = None) -> CaseData:
    """
    Build validated CaseData from numeric MATPOWER bus and branch tables.

    Args:
        base_mva: System base power
        bus_table: Bus table (rows in MATPOWER column order)
        branch_table: Branch table (rows in MATPOWER column order)
        name: Case label
        bus_lines: Source line per bus row, for error messages
        branch_lines: Source line per branch row, for error messages

    Returns:
        CaseData

    Raises:
        CaseParseError: Invalid base power, missing columns, duplicate bus
            numbers or branches to unknown buses
    """
    bus_table = np.atleast_2d(np.asarray(bus_table, dtype=float))
    branch_table = np.atleast_2d(np.asarray(branch_table, dtype=float))
    bus_lines = list(bus_lines) if bus_lines is not None else [None] * len(bus_table)
    branch_lines = list(branch_lines) if branch_lines is not None else [None] * len(branch_table)

    if not base_mva > 0:
        raise CaseParseError(f"baseMVA must be positive, got {base_mva}")
    if bus_table.size == 0:
        raise CaseParseError("Bus table is empty")
    if bus_table.shape[1] < _MIN_BUS_COLUMNS:
        raise CaseParseError(f"Bus table needs at least {_MIN_BUS_COLUMNS} columns, "
                             f"got {bus_table.shape[1]}", bus_lines[0])
    if branch_table.size and branch_table.shape[1] < _MIN_BRANCH_COLUMNS:
        raise CaseParseError(f"Branch table needs at least {_MIN_BRANCH_COLUMNS} columns, "
                             f"got {branch_table.shape[1]}", branch_lines[0])

    has_bounds = bus_table.shape[1] > idx_bus.VMIN
    id_map: Dict[int, int] = {}
    buses = []
    for row, line_number in zip(bus_table, bus_lines):
        original = int(row[idx_bus.BUS_I])
        if original in id_map:
            raise CaseParseError(f"Duplicate bus number {original}", line_number)
        id_map[original] = len(id_map) + 1
        buses.append(BusRecord(
            bus_id=id_map[original],
            original_id=original,
            gs=float(row[idx_bus.GS]),
            bs=float(row[idx_bus.BS]),
            vmin=float(row[idx_bus.VMIN]) if has_bounds else None,
            vmax=float(row[idx_bus.VMAX]) if has_bounds else None,
        ))

    def column(row, index, default):
        return float(row[index]) if len(row) > index else default

    branches = []
    if branch_table.size:
        for row, line_number in zip(branch_table, branch_lines):
            ends = []
            for index in (idx_brch.F_BUS, idx_brch.T_BUS):
                original = int(row[index])
                if original not in id_map:
                    raise CaseParseError(f"Branch references unknown bus {original}", line_number)
                ends.append(id_map[original])
            branches.append(BranchRecord(
                from_bus=ends[0],
                to_bus=ends[1],
                r=float(row[idx_brch.BR_R]),
                x=float(row[idx_brch.BR_X]),
                b=float(row[idx_brch.BR_B]),
                tap=column(row, idx_brch.TAP, 0.0),
                shift=column(row, idx_brch.SHIFT, 0.0),
                status=int(column(row, idx_brch.BR_STATUS, 1.0)),
                line_number=line_number or 0,
            ))

    return CaseData(
        base_mva=float(base_mva),
        buses=tuple(buses),
        branches=tuple(branches),
        id_map=id_map,
        name=name,
    )


def load_builtin_case(name: str) -> CaseData:
    """
    Load one of the IEEE cases bundled with PYPOWER.

    Args:
        name: One of case14, case39, case57, case118

    Returns:
        CaseData built from the PYPOWER tables

    Raises:
        ValueError: If the name is not a bundled case
    """
    if name not in BUILTIN_CASES:
        raise ValueError(f"Unknown bundled case '{name}'. Available: {list(BUILTIN_CASES)}")

    module = importlib.import_module(f"pypower.{name}")
    ppc = getattr(module, name)()
    case = case_from_tables(ppc['baseMVA'], ppc['bus'], ppc['branch'], name=name)
    logger.info(f"Loaded bundled {name}: {case.n_bus} buses, {len(case.branches)} branches")
    return case


def build_admittance(case: CaseData) -> Tuple[np.ndarray, np.ndarray]:
    """
    Assemble the bus admittance matrix Y = G + jB.

    Each in-service branch contributes the π-model stamp with series
    admittance y = 1/(r + jx) and complex tap t = τ·e^{jσ}:
    Y_ff += (y + jb/2)/|t|², Y_tt += y + jb/2, Y_ft −= y/conj(t), Y_tf −= y/t.
    Bus shunts add (Gs + jBs)/baseMVA on the diagonal.

    Args:
        case: Parsed case

    Returns:
        Tuple (G, B) of dense N×N matrices

    Raises:
        ValueError: If an in-service branch has r = x = 0
    """
    n = case.n_bus
    Y = np.zeros((n, n), dtype=complex)

    for br in case.in_service_branches():
        if br.r == 0 and br.x == 0:
            raise ValueError(f"Branch {br.from_bus}-{br.to_bus} has zero impedance"
                             + (f" (line {br.line_number})" if br.line_number else ""))
        y_series = 1.0 / complex(br.r, br.x)
        tap = br.tap_ratio * np.exp(1j * np.deg2rad(br.shift))
        y_tt = y_series + 0.5j * br.b
        f, t = br.from_bus - 1, br.to_bus - 1

        Y[f, f] += y_tt / (tap * np.conj(tap))
        Y[t, t] += y_tt
        Y[f, t] += -y_series / np.conj(tap)
        Y[t, f] += -y_series / tap

    for bus in case.buses:
        Y[bus.bus_id - 1, bus.bus_id - 1] += complex(bus.gs, bus.bs) / case.base_mva

    return Y.real.copy(), Y.imag.copy()


class CaseReader:
    """
    Loads cases from files, the configured case directory or bundled names.

    A bare name such as "case14" is looked up as <case_dir>/case14.m first
    and falls back to the PYPOWER tables.
    """

    def __init__(self, config_path: str = "settings.ini"):
        """
        Initialize the reader with configuration.

        Args:
            config_path: Path to the configuration file
        """
        self.logger = logging.getLogger(__name__)
        self.config = load_settings(config_path)
        self.case_dir = Path(self.config.get('DATA', 'case_dir', fallback='cases'))

    def resolve(self, case: str) -> Optional[Path]:
        """
        Find the file behind a case argument.

        Args:
            case: File path or bare case name

        Returns:
            Existing file path, or None when only a bundled table can serve it
        """
        path = Path(case)
        if path.is_file():
            return path
        candidate = self.case_dir / f"{case}.m"
        if candidate.is_file():
            return candidate
        return None

    def load(self, case: str) -> CaseData:
        """
        Load a case from a MATPOWER file path or a case name.

        Args:
            case: File path, or a name found in the case directory or bundled

        Returns:
            Parsed CaseData

        Raises:
            FileNotFoundError: If nothing matches the argument
            CaseParseError: If the file cannot be parsed
        """
        path = self.resolve(case)
        if path is not None:
            self.logger.info(f"Loading case file: {path}")
            return parse_matpower_case(path.read_text(encoding='utf-8'), name=path.stem)

        if case in BUILTIN_CASES:
            return load_builtin_case(case)

        raise FileNotFoundError(f"Case file not found and not a bundled case: {case}")
