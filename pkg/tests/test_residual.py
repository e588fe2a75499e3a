"""
Tests for residual models, merit values and finite-difference checks.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from src.models.residual import (NonFiniteResidualError, ResidualModel, estimate_lipschitz,
                                 fd_jacobian, jacobian_check, merit_value)
from src.models.synthetic import cubic_perturbed_model, half_square_model, linear_model
from src.sets.feasible import BoxSet
from src.utils.linalg import spectral_norm


def identity_model(n):
    return linear_model(np.eye(n), np.zeros(n), name="identity")


class TestMeritValue:

    def test_norm_of_residual(self):
        assert merit_value(identity_model(2), [3.0, 4.0]) == pytest.approx(5.0)

    def test_zero_at_root(self):
        model = half_square_model([2.0, 0.5])
        assert merit_value(model, [2.0, 1.0]) == pytest.approx(0.0, abs=1e-15)

    def test_constant_component(self):
        model = ResidualModel(1, 2, lambda x: np.array([x[0] - 1.0, 2.0]),
                              lambda x: np.array([[1.0], [0.0]]))
        assert merit_value(model, [1.0]) == pytest.approx(2.0)

    def test_non_finite_reports_index(self):
        model = ResidualModel(2, 3, lambda x: np.array([0.0, 1.0, np.inf]),
                              lambda x: np.zeros((3, 2)))
        with pytest.raises(NonFiniteResidualError) as info:
            merit_value(model, np.zeros(2))
        assert info.value.index == 2

    def test_rotation_invariance(self, rng):
        A = rng.standard_normal((4, 3))
        b = rng.standard_normal(4)
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        plain = linear_model(A, b)
        rotated = linear_model(Q @ A, Q @ b)
        x = rng.standard_normal(3)
        assert merit_value(rotated, x) == pytest.approx(merit_value(plain, x), rel=1e-12)

    def test_dimension_check(self):
        with pytest.raises(ValueError, match="expected point"):
            merit_value(identity_model(2), [1.0, 2.0, 3.0])


class TestFiniteDifferences:

    def test_linear_map_exact(self, rng):
        A = rng.standard_normal((3, 4))
        J = fd_jacobian(linear_model(A, np.zeros(3)), rng.standard_normal(4))
        assert_allclose(J, A, atol=1e-8)

    def test_scalar_square(self):
        model = ResidualModel(1, 1, lambda x: x ** 2, lambda x: np.array([[2 * x[0]]]))
        assert fd_jacobian(model, [1.0], h=1e-6)[0, 0] == pytest.approx(2.0, abs=1e-9)

    def test_rejects_nonpositive_step(self):
        with pytest.raises(ValueError):
            fd_jacobian(identity_model(1), [0.0], h=0.0)

    def test_linear_model_passes_check(self, rng):
        report = jacobian_check(linear_model(rng.standard_normal((3, 3)), np.ones(3)), np.ones(3))
        assert report.passed
        assert report.max_rel_error < 1e-8

    def test_wrong_entry_is_located(self):
        def bad_jacobian(x):
            J = np.diag(x)
            J[1, 1] = -J[1, 1]
            return J
        model = ResidualModel(3, 3, lambda x: 0.5 * x ** 2, bad_jacobian)
        report = jacobian_check(model, np.array([1.0, 2.0, 3.0]))
        assert not report.passed
        assert report.worst_entry == (1, 1)

    @pytest.mark.parametrize("factory", [
        lambda rng: half_square_model(rng.uniform(0, 1, 4)),
        lambda rng: cubic_perturbed_model(np.eye(4) + 0.1 * rng.standard_normal((4, 4)),
                                          rng.standard_normal(4), eps=0.3, radius=1.0),
    ])
    def test_shipped_models_pass(self, rng, factory):
        model = factory(rng)
        box = BoxSet(-np.ones(model.n), np.ones(model.n))
        for _ in range(20):
            assert jacobian_check(model, box.sample(rng), h=1e-6, tol=1e-5).passed


class TestLipschitzEstimate:

    def test_linear_is_zero(self, rng):
        model = linear_model(rng.standard_normal((3, 3)), np.zeros(3))
        assert estimate_lipschitz(model, BoxSet(-np.ones(3), np.ones(3))) == pytest.approx(0.0)

    def test_half_square_lower_bound(self):
        model = half_square_model(np.zeros(3))
        box = BoxSet(np.zeros(3), np.ones(3))
        estimate = estimate_lipschitz(model, box, samples=200, seed=1)
        assert 0.5 < estimate <= 1.0 + 1e-9

    def test_degenerate_box(self):
        model = half_square_model(np.zeros(2))
        assert estimate_lipschitz(model, BoxSet([1.0, 1.0], [1.0, 1.0])) == 0.0

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            estimate_lipschitz(identity_model(1), BoxSet([0.0], [1.0]), samples=1)

    def test_deterministic(self):
        model = half_square_model(np.zeros(3))
        box = BoxSet(np.zeros(3), np.ones(3))
        assert estimate_lipschitz(model, box, seed=7) == estimate_lipschitz(model, box, seed=7)


def test_spectral_norm_matches_svd(rng):
    A = rng.standard_normal((6, 4))
    assert spectral_norm(A) == pytest.approx(np.linalg.norm(A, 2), rel=1e-8)
    assert spectral_norm(np.zeros((3, 3))) == 0.0
