"""
Shared fixtures for the test suite.
"""

from pathlib import Path

import numpy as np
import pytest

from src.data.case_reader import load_builtin_case, parse_matpower_case
from src.power.grid import PowerSystem
from src.sets.feasible import BoxSet


ROOT = Path(__file__).resolve().parent.parent
CASES_DIR = ROOT / "cases"
FIXTURES_DIR = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES_DIR


@pytest.fixture
def cases_dir() -> Path:
    return CASES_DIR


@pytest.fixture
def case2():
    return parse_matpower_case((CASES_DIR / "case2.m").read_text(), name="case2")


@pytest.fixture
def case2_system(case2):
    return PowerSystem.from_case(case2)


@pytest.fixture(scope="session")
def case14():
    return load_builtin_case("case14")


@pytest.fixture(scope="session")
def case14_system(case14):
    return PowerSystem.from_case(case14)


@pytest.fixture
def unit_box():
    return BoxSet(np.zeros(2), np.ones(2))


def complex_injections(system: PowerSystem, u, theta):
    """Reference (p, q) from S = v ⊙ conj(Y v)."""
    v = np.asarray(u) * np.exp(1j * np.asarray(theta))
    s = v * np.conj(system.admittance() @ v)
    return s.real, s.imag
