"""
Residual models for nonlinear least squares.

This module defines the ResidualModel abstraction supplying F(x) and its
Jacobian, the merit function ‖F(x)‖, and finite-difference oracles used
to validate analytic Jacobians.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from ..sets.feasible import BoxSet
from ..utils.linalg import spectral_norm


logger = logging.getLogger(__name__)


class NonFiniteResidualError(ValueError):
    """Raised when a residual vector contains NaN or infinite entries."""

    def __init__(self, index: int, value: float):
        super().__init__(f"Residual entry {index} is not finite: {value}")
        self.index = index
        self.value = value


@dataclass(frozen=True)
class ResidualModel:
    """
    A residual map F: ℝⁿ → ℝᵐ with its Jacobian.

    Attributes:
        n: Variable dimension
        m: Residual dimension
        residual: Callable returning F(x) as a length-m vector
        jacobian: Callable returning ∇F(x) as an (m, n) matrix
        lipschitz_hint: Optional known Lipschitz constant of the Jacobian
        name: Label used in logs and reports
    """
    n: int
    m: int
    residual: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    lipschitz_hint: Optional[float] = None
    name: str = "model"

    def __post_init__(self):
        if self.n <= 0 or self.m <= 0:
            raise ValueError(f"Dimensions must be positive, got n={self.n}, m={self.m}")
        if self.lipschitz_hint is not None and not self.lipschitz_hint > 0:
            raise ValueError(f"lipschitz_hint must be positive, got {self.lipschitz_hint}")

    def _point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise ValueError(f"{self.name}: expected point of shape ({self.n},), got {x.shape}")
        return x

    def evaluate(self, x) -> np.ndarray:
        """
        Evaluate F(x) with a dimension check.

        Args:
            x: Point in ℝⁿ

        Returns:
            Residual vector of length m
        """
        value = np.asarray(self.residual(self._point(x)), dtype=float).reshape(-1)
        if value.shape != (self.m,):
            raise ValueError(f"{self.name}: residual has shape {value.shape}, expected ({self.m},)")
        return value

    def jacobian_at(self, x) -> np.ndarray:
        """
        Evaluate ∇F(x) with a dimension check.

        Args:
            x: Point in ℝⁿ

        Returns:
            Jacobian matrix of shape (m, n)
        """
        value = np.asarray(self.jacobian(self._point(x)), dtype=float)
        if value.shape != (self.m, self.n):
            raise ValueError(
                f"{self.name}: Jacobian has shape {value.shape}, expected ({self.m}, {self.n})")
        return value


@dataclass(frozen=True)
class JacobianCheckReport:
    """
    Outcome of comparing an analytic Jacobian with finite differences.

    Attributes:
        max_abs_error: Largest absolute entry difference
        max_rel_error: Largest relative difference, denominator max(1, |fd entry|)
        worst_entry: (row, column) of the largest relative difference
        tol: Tolerance the report was judged against
    """
    max_abs_error: float
    max_rel_error: float
    worst_entry: Tuple[int, int]
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tol


def merit_value(model: ResidualModel, x) -> float:
    """
    Compute the merit function f(x) = ‖F(x)‖.

    Args:
        model: Residual model
        x: Point in ℝⁿ

    Returns:
        Euclidean norm of the residual

    Raises:
        NonFiniteResidualError: If any residual entry is NaN or infinite
    """
    value = model.evaluate(x)
    bad = np.flatnonzero(~np.isfinite(value))
    if bad.size:
        index = int(bad[0])
        raise NonFiniteResidualError(index, float(value[index]))
    return float(np.linalg.norm(value))


def fd_jacobian(model: ResidualModel, x, h: float = 1e-6) -> np.ndarray:
    """
    Central-difference approximation of the Jacobian.

    Args:
        model: Residual model
        x: Point in ℝⁿ
        h: Step length

    Returns:
        Matrix with entry (i, j) = (F_i(x + h e_j) − F_i(x − h e_j)) / (2h)
    """
    if not h > 0:
        raise ValueError(f"Step h must be positive, got {h}")

    x = np.asarray(x, dtype=float)
    columns = []
    for j in range(model.n):
        e = np.zeros(model.n)
        e[j] = h
        columns.append((model.evaluate(x + e) - model.evaluate(x - e)) / (2.0 * h))
    return np.column_stack(columns)


def jacobian_check(model: ResidualModel, x, h: float = 1e-6, tol: float = 1e-5) -> JacobianCheckReport:
    """
    Compare the analytic Jacobian to central finite differences.

    Args:
        model: Residual model
        x: Point in ℝⁿ
        h: Finite-difference step
        tol: Relative tolerance recorded in the report

    Returns:
        JacobianCheckReport with the worst entry located
    """
    if not tol > 0:
        raise ValueError(f"Tolerance must be positive, got {tol}")

    analytic = model.jacobian_at(x)
    numeric = fd_jacobian(model, x, h)

    abs_err = np.abs(analytic - numeric)
    rel_err = abs_err / np.maximum(1.0, np.abs(numeric))
    row, col = np.unravel_index(int(np.argmax(rel_err)), rel_err.shape)

    report = JacobianCheckReport(
        max_abs_error=float(abs_err.max()),
        max_rel_error=float(rel_err.max()),
        worst_entry=(int(row), int(col)),
        tol=tol,
    )
    if not report.passed:
        logger.warning(f"{model.name}: Jacobian mismatch {report.max_rel_error:.3e} "
                       f"at entry {report.worst_entry}")
    return report


def estimate_lipschitz(model: ResidualModel, box: BoxSet, samples: int = 20, seed: int = 0,
                       bounded_fallback: Tuple[float, float] = (-1.0, 1.0)) -> float:
    """
    Empirical lower bound for the Lipschitz constant of the Jacobian.

    Draws `samples` feasible points and takes the largest ratio
    ‖∇F(x) − ∇F(y)‖₂ / ‖x − y‖ over consecutive pairs.

    Args:
        model: Residual model
        box: Feasible box to sample from
        samples: Number of sampled points (at least 2)
        seed: Seed for the sampler
        bounded_fallback: Interval for unbounded coordinates

    Returns:
        Largest observed ratio (0.0 for a single-point box)
    """
    if samples < 2:
        raise ValueError(f"Need at least 2 samples, got {samples}")
    if box.is_degenerate():
        return 0.0

    rng = np.random.default_rng(seed)
    points = [box.sample(rng, bounded_fallback) for _ in range(samples)]
    jacobians = [model.jacobian_at(p) for p in points]

    best = 0.0
    for (x, jx), (y, jy) in zip(zip(points, jacobians), zip(points[1:], jacobians[1:])):
        dist = np.linalg.norm(x - y)
        if dist == 0.0:
            continue
        best = max(best, spectral_norm(jx - jy) / dist)

    logger.debug(f"{model.name}: Lipschitz estimate {best:.6g} from {samples} samples")
    return best
