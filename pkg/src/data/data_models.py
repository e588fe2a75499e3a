"""
Data models for power-system case data.

This module defines the bus, branch and case records produced by the
MATPOWER case reader.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple


@dataclass(frozen=True)
class BusRecord:
    """
    One bus of a case, renumbered to a contiguous index.

    Attributes:
        bus_id: Contiguous bus number 1..N
        original_id: Bus number as written in the case
        gs: Shunt conductance (MW demanded at V = 1 p.u.)
        bs: Shunt susceptance (MVAr injected at V = 1 p.u.)
        vmin: Lower voltage-magnitude bound in p.u., if present
        vmax: Upper voltage-magnitude bound in p.u., if present
    """
    bus_id: int
    original_id: int
    gs: float = 0.0
    bs: float = 0.0
    vmin: Optional[float] = None
    vmax: Optional[float] = None


@dataclass(frozen=True)
class BranchRecord:
    """
    One branch (line or transformer) in π-model form.

    Attributes:
        from_bus: Contiguous index of the from-end bus
        to_bus: Contiguous index of the to-end bus
        r: Series resistance (p.u.)
        x: Series reactance (p.u.)
        b: Total line-charging susceptance (p.u.)
        tap: Off-nominal tap ratio (0 means 1)
        shift: Phase shift angle in degrees
        status: 1 in service, 0 out of service
        line_number: Source line of the row (0 for tables not read from text)
    """
    from_bus: int
    to_bus: int
    r: float
    x: float
    b: float = 0.0
    tap: float = 0.0
    shift: float = 0.0
    status: int = 1
    line_number: int = field(default=0, compare=False)

    @property
    def in_service(self) -> bool:
        return self.status != 0

    @property
    def tap_ratio(self) -> float:
        return self.tap if self.tap != 0 else 1.0


@dataclass(frozen=True)
class CaseData:
    """
    Bus and branch tables of a power-system case.

    Attributes:
        base_mva: System base power (MVA)
        buses: Buses ordered by contiguous id
        branches: All branches, in service or not
        id_map: Original bus number → contiguous id
        name: Case label
    """
    base_mva: float
    buses: Tuple[BusRecord, ...]
    branches: Tuple[BranchRecord, ...]
    id_map: Dict[int, int]
    name: str = "case"

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    def in_service_branches(self) -> Tuple[BranchRecord, ...]:
        return tuple(br for br in self.branches if br.in_service)

    def has_phase_shifters(self) -> bool:
        return any(br.shift != 0 for br in self.in_service_branches())

    def __len__(self) -> int:
        """Return the number of buses."""
        return len(self.buses)
