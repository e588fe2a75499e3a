"""
Tests for the tail-rate classification of merit traces.
"""

import numpy as np
import pytest

from src.diagnostics.kl_rate import (INCONCLUSIVE, LINEAR, STALLED, SUBLINEAR, RateFit,
                                     fit_kl_rate)


def test_geometric_sequence_is_linear():
    fit = fit_kl_rate(0.5 ** np.arange(60))
    assert fit.regime == LINEAR
    assert fit.rate == pytest.approx(0.5, abs=1e-6)
    assert fit.r2 == pytest.approx(1.0, abs=1e-9)
    assert fit.window == (30, 59)
    assert fit.implied_kl_exponent == 2.0


def test_harmonic_sequence_is_sublinear():
    fit = fit_kl_rate(1.0 / (np.arange(200) + 1.0))
    assert fit.regime == SUBLINEAR
    assert fit.rate == pytest.approx(1.0, abs=1e-3)
    assert fit.implied_kl_exponent == pytest.approx(1.0, abs=1e-3)


def test_offset_by_optimal_value():
    values = 3.0 + 0.8 ** np.arange(80)
    fit = fit_kl_rate(values, f_star=3.0)
    assert fit.regime == LINEAR
    assert fit.rate == pytest.approx(0.8, abs=1e-6)


def test_constant_sequence_is_stalled():
    fit = fit_kl_rate(np.full(50, 0.3))
    assert fit.regime == STALLED
    assert fit.rate == 1.0


def test_scale_invariance():
    base = 0.7 ** np.arange(40) + 1e-3 / (np.arange(40) + 1.0)
    fit = fit_kl_rate(base)
    scaled = fit_kl_rate(7.5 * base)
    assert scaled.regime == fit.regime
    assert scaled.rate == pytest.approx(fit.rate, rel=1e-9)
    assert scaled.r2 == pytest.approx(fit.r2, rel=1e-9)


def test_short_tail_is_inconclusive():
    fit = fit_kl_rate(0.5 ** np.arange(6))
    assert fit.regime == INCONCLUSIVE
    assert fit.implied_kl_exponent is None


def test_tail_reaching_optimum_is_inconclusive():
    values = np.concatenate([0.5 ** np.arange(20), np.zeros(20)])
    assert fit_kl_rate(values).regime == INCONCLUSIVE


def test_poor_fit_is_inconclusive():
    values = np.ones(40)
    values[-1] = 1e-10
    fit = fit_kl_rate(values)
    assert fit.regime == INCONCLUSIVE
    assert fit.r2 < 0.9


def test_empty_sequence():
    assert fit_kl_rate([]) == RateFit(INCONCLUSIVE, 0.0, 0.0, (0, -1))


def test_full_window():
    fit = fit_kl_rate(0.5 ** np.arange(10), tail_fraction=1.0)
    assert fit.window == (0, 9)
    assert fit.regime == LINEAR


@pytest.mark.parametrize("fraction", [0.0, -0.5, 1.5])
def test_bad_tail_fraction(fraction):
    with pytest.raises(ValueError, match="tail_fraction"):
        fit_kl_rate(np.ones(10), tail_fraction=fraction)


def test_increasing_values_rejected():
    with pytest.raises(ValueError, match="nonincreasing"):
        fit_kl_rate([1.0, 0.5, 0.6])


def test_f_star_above_minimum_rejected():
    with pytest.raises(ValueError, match="exceeds"):
        fit_kl_rate([1.0, 0.5, 0.25], f_star=0.3)


def test_non_finite_rejected():
    with pytest.raises(ValueError, match="finite"):
        fit_kl_rate([1.0, np.inf])


def test_quadratic_sequence_is_linear():
    fit = fit_kl_rate(10.0 ** -(2.0 ** np.arange(9)))
    assert fit.regime == LINEAR
    assert fit.rate == pytest.approx(1e-16, rel=1e-6)
    assert fit.r2 < 0.9
    assert fit.window == (4, 8)
