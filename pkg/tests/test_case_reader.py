"""
Tests for MATPOWER parsing, bundled cases and admittance assembly.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.data.case_reader import (BUILTIN_CASES, CaseParseError, CaseReader, build_admittance,
                                  case_from_tables, load_builtin_case, parse_matpower_case)
from src.power.grid import PowerSystem

from .conftest import CASES_DIR, FIXTURES_DIR


def parse_fixture(name):
    return parse_matpower_case((FIXTURES_DIR / name).read_text(), name=name)


def two_bus_tables(**branch):
    bus = [[1, 3, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1.1, 0.9],
           [2, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1.1, 0.9]]
    row = dict(r=0.01, x=0.1, b=0.0, tap=0.0, shift=0.0, status=1)
    row.update(branch)
    table = [[1, 2, row['r'], row['x'], row['b'], 0, 0, 0, row['tap'], row['shift'], row['status']]]
    return bus, table


class TestParse:

    def test_two_bus_case(self, case2):
        assert case2.n_bus == 2
        assert len(case2.branches) == 1
        assert case2.base_mva == 100.0
        assert case2.buses[1].vmin == 0.9

    def test_two_bus_admittance(self, case2):
        G, B = build_admittance(case2)
        y = 1.0 / complex(0.01, 0.1)
        expected = np.array([[y, -y], [-y, y]])
        assert_allclose(G, expected.real, atol=1e-12)
        assert_allclose(B, expected.imag, atol=1e-12)

    def test_ieee14_file(self):
        case = parse_matpower_case((CASES_DIR / "case14.m").read_text(), name="case14")
        assert case.n_bus == 14
        assert len(case.branches) == 20

    def test_ieee14_file_matches_bundled_tables(self, case14):
        from_file = parse_matpower_case((CASES_DIR / "case14.m").read_text(), name="case14")
        for mine, theirs in zip(build_admittance(from_file), build_admittance(case14)):
            assert_allclose(mine, theirs, atol=1e-12)

    def test_parse_is_deterministic(self):
        text = (CASES_DIR / "case14.m").read_text()
        assert parse_matpower_case(text) == parse_matpower_case(text)

    def test_single_line_tables(self):
        case = parse_fixture("case2_shifter.m")
        assert case.n_bus == 2
        assert case.branches[0].tap == 0.95
        assert case.branches[0].shift == 10.0

    def test_renumbering(self):
        case = parse_fixture("case3_outage.m")
        assert case.id_map == {10: 1, 20: 2, 30: 3}
        assert [b.original_id for b in case.buses] == [10, 20, 30]
        assert (case.branches[1].from_bus, case.branches[1].to_bus) == (2, 3)


class TestParseErrors:

    def test_ragged_row(self):
        with pytest.raises(CaseParseError, match="Ragged") as info:
            parse_fixture("case_ragged.m")
        assert info.value.line_number == 4

    def test_unknown_bus(self):
        with pytest.raises(CaseParseError, match="unknown bus 7") as info:
            parse_fixture("case_unknown_bus.m")
        assert info.value.line_number == 8

    def test_missing_branch_table(self):
        with pytest.raises(CaseParseError, match="mpc.branch") as info:
            parse_fixture("case_no_branch.m")
        assert info.value.line_number == 4

    def test_non_numeric_entry(self):
        text = "mpc.baseMVA = 100;\nmpc.bus = [1 3 0 0 0 x];\nmpc.branch = [];\n"
        with pytest.raises(CaseParseError, match="Non-numeric") as info:
            parse_matpower_case(text)
        assert info.value.line_number == 2

    def test_unclosed_table(self):
        text = "mpc.baseMVA = 100;\nmpc.bus = [\n1 3 0 0 0 0;\n"
        with pytest.raises(CaseParseError, match="never closed"):
            parse_matpower_case(text)

    def test_duplicate_bus(self):
        bus, branch = two_bus_tables()
        bus[1][0] = 1
        with pytest.raises(CaseParseError, match="Duplicate"):
            case_from_tables(100.0, bus, branch)

    def test_parse_error_is_value_error(self):
        assert issubclass(CaseParseError, ValueError)


class TestAdmittance:

    def test_line_charging_on_diagonal(self):
        plain = build_admittance(case_from_tables(100.0, *two_bus_tables(b=0.0)))
        charged = build_admittance(case_from_tables(100.0, *two_bus_tables(b=0.06)))
        assert_allclose(charged[0], plain[0], atol=1e-14)
        assert_allclose(np.diag(charged[1] - plain[1]), [0.03, 0.03], atol=1e-14)
        assert_allclose(charged[1][0, 1], plain[1][0, 1], atol=1e-14)

    def test_out_of_service_branch_ignored(self):
        case = parse_fixture("case3_outage.m")
        G, B = build_admittance(case)
        assert G[0, 2] == 0.0 and B[0, 2] == 0.0
        assert G[2, 0] == 0.0 and B[2, 0] == 0.0

    def test_shunt_scaled_by_base(self):
        case = parse_fixture("case3_outage.m")
        G, B = build_admittance(case)
        y12 = 1.0 / complex(0.01, 0.1)
        y23 = 1.0 / complex(0.02, 0.2)
        expected = y12 + 0.01j + y23 + complex(5, 10) / 100.0
        assert G[1, 1] == pytest.approx(expected.real, abs=1e-12)
        assert B[1, 1] == pytest.approx(expected.imag, abs=1e-12)
        assert B[0, 0] == pytest.approx((y12 + 0.01j).imag, abs=1e-12)

    def test_phase_shifter(self):
        case = parse_fixture("case2_shifter.m")
        assert case.has_phase_shifters()
        G, B = build_admittance(case)
        Y = G + 1j * B
        y = 1.0 / 0.1j
        tap = 0.95 * np.exp(1j * np.deg2rad(10.0))
        assert Y[0, 0] == pytest.approx(y / abs(tap) ** 2, abs=1e-12)
        assert Y[1, 1] == pytest.approx(y, abs=1e-12)
        assert Y[0, 1] == pytest.approx(-y / np.conj(tap), abs=1e-12)
        assert Y[1, 0] == pytest.approx(-y / tap, abs=1e-12)
        assert not np.allclose(Y, Y.T)

    def test_lossless_case(self):
        G, B = build_admittance(parse_fixture("case_lossless.m"))
        assert_allclose(G, 0.0, atol=1e-15)
        assert_allclose(B, B.T, atol=1e-15)

    def test_zero_impedance(self):
        case = case_from_tables(100.0, *two_bus_tables(r=0.0, x=0.0))
        with pytest.raises(ValueError, match="zero impedance"):
            build_admittance(case)

    def test_zero_impedance_out_of_service(self):
        case = case_from_tables(100.0, *two_bus_tables(r=0.0, x=0.0, status=0))
        G, B = build_admittance(case)
        assert not G.any() and not B.any()

    @pytest.mark.parametrize("name", BUILTIN_CASES)
    def test_symmetric_without_shifters(self, name):
        case = load_builtin_case(name)
        G, B = build_admittance(case)
        assert G.shape == (case.n_bus, case.n_bus)
        assert PowerSystem.from_case(case).is_symmetric() == (not case.has_phase_shifters())
        if not case.has_phase_shifters():
            assert_allclose(G, G.T, atol=1e-12)
            assert_allclose(B, B.T, atol=1e-12)

    @pytest.mark.parametrize("name", ["case14", "case39"])
    def test_matches_pypower_ybus(self, name):
        import importlib

        from pypower.ext2int import ext2int
        from pypower.makeYbus import makeYbus

        ppc = ext2int(getattr(importlib.import_module(f"pypower.{name}"), name)())
        Ybus, _, _ = makeYbus(ppc['baseMVA'], ppc['bus'], ppc['branch'])
        G, B = build_admittance(load_builtin_case(name))
        assert_allclose(G + 1j * B, Ybus.toarray(), atol=1e-10)

    def test_unknown_builtin(self):
        with pytest.raises(ValueError, match="Unknown bundled case"):
            load_builtin_case("case9999")


class TestCaseReader:

    @pytest.fixture
    def settings_file(self, tmp_path):
        path = tmp_path / "settings.ini"
        path.write_text(f"[DATA]\ncase_dir = {CASES_DIR}\n")
        return str(path)

    def test_resolve_by_name(self, settings_file):
        assert CaseReader(settings_file).resolve("case2") == CASES_DIR / "case2.m"

    def test_resolve_by_path(self, settings_file):
        path = FIXTURES_DIR / "case_lossless.m"
        assert CaseReader(settings_file).resolve(str(path)) == path

    def test_load_from_directory(self, settings_file):
        case = CaseReader(settings_file).load("case2")
        assert case.name == "case2"
        assert case.n_bus == 2

    def test_bundled_fallback(self, tmp_path):
        path = tmp_path / "settings.ini"
        path.write_text(f"[DATA]\ncase_dir = {tmp_path}\n")
        case = CaseReader(str(path)).load("case39")
        assert case.n_bus == 39

    def test_missing_case(self, settings_file):
        with pytest.raises(FileNotFoundError):
            CaseReader(settings_file).load("no_such_case")
