"""
Feasible sets with exact Euclidean projections.

This module defines the box constraint set used by the outer solvers and
the Euclidean ball used as the dual feasible set of the Gauss-Newton
subproblem.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np


def _as_vector(values) -> np.ndarray:
    vector = np.array(values, dtype=float).reshape(-1)
    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class BoxSet:
    """
    Box constraint lower ≤ x ≤ upper.

    Infinite bounds encode unconstrained coordinates, so BoxSet.unbounded(n)
    represents the whole space ℝⁿ.

    Attributes:
        lower: Per-coordinate lower bounds
        upper: Per-coordinate upper bounds
    """
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _as_vector(self.lower)
        upper = _as_vector(self.upper)

        if lower.shape != upper.shape:
            raise ValueError(
                f"Bound lengths differ: lower has {lower.size}, upper has {upper.size}")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("Bounds must not contain NaN")

        bad = np.flatnonzero(lower > upper)
        if bad.size:
            i = int(bad[0])
            raise ValueError(f"lower[{i}]={lower[i]} exceeds upper[{i}]={upper[i]}")

        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)

    @classmethod
    def unbounded(cls, n: int) -> 'BoxSet':
        """Return the box covering all of ℝⁿ."""
        return cls(np.full(n, -np.inf), np.full(n, np.inf))

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, x, tol: float = 0.0) -> bool:
        return contains(x, self, tol)

    def is_degenerate(self) -> bool:
        """True when the box is a single point."""
        return bool(np.all(self.lower == self.upper))

    def sample(self, rng: np.random.Generator,
               bounded_fallback: Tuple[float, float] = (-1.0, 1.0)) -> np.ndarray:
        """
        Draw a uniform sample per coordinate.

        Coordinates with an infinite bound are sampled from the fallback
        interval intersected with the finite side of the bound.

        Args:
            rng: Random generator
            bounded_fallback: Interval used for unbounded coordinates

        Returns:
            Feasible point
        """
        lo_fb, hi_fb = bounded_fallback
        lower = np.where(np.isfinite(self.lower), self.lower, lo_fb)
        upper = np.where(np.isfinite(self.upper), self.upper, hi_fb)

        # half-bounded coordinates: keep the fallback width on the finite side
        only_upper = ~np.isfinite(self.lower) & np.isfinite(self.upper)
        only_lower = np.isfinite(self.lower) & ~np.isfinite(self.upper)
        width = hi_fb - lo_fb
        lower = np.where(only_upper, self.upper - width, lower)
        upper = np.where(only_lower, self.lower + width, upper)

        point = lower + (upper - lower) * rng.random(self.dim)
        return np.clip(point, self.lower, self.upper)


@dataclass(frozen=True, eq=False)
class BallSet:
    """
    Closed Euclidean ball ‖s − center‖ ≤ radius.

    Attributes:
        center: Ball center
        radius: Nonnegative radius
    """
    center: np.ndarray
    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'center', _as_vector(self.center))
        if not self.radius >= 0:
            raise ValueError(f"Radius must be nonnegative, got {self.radius}")
        object.__setattr__(self, 'radius', float(self.radius))

    @classmethod
    def unit(cls, m: int) -> 'BallSet':
        """Return the unit ball at the origin of ℝᵐ."""
        return cls(np.zeros(m), 1.0)

    @property
    def dim(self) -> int:
        return self.center.size


def _check_dim(x: np.ndarray, dim: int) -> None:
    if x.shape != (dim,):
        raise ValueError(f"Dimension mismatch: point has shape {x.shape}, set has dimension {dim}")


def project_box(x, box: BoxSet) -> np.ndarray:
    """
    Project a point onto a box by componentwise clamping.

    Args:
        x: Point to project
        box: Target box

    Returns:
        The unique nearest point of the box

    Raises:
        ValueError: If dimensions do not match
    """
    x = np.asarray(x, dtype=float)
    _check_dim(x, box.dim)
    return np.clip(x, box.lower, box.upper)


def project_ball(s, ball: BallSet) -> np.ndarray:
    """
    Project a point onto a Euclidean ball by radial rescaling.

    Args:
        s: Point to project
        ball: Target ball

    Returns:
        s itself when inside the ball, otherwise the nearest boundary point

    Raises:
        ValueError: If dimensions do not match
    """
    s = np.asarray(s, dtype=float)
    _check_dim(s, ball.dim)

    offset = s - ball.center
    dist = np.linalg.norm(offset)
    if dist <= ball.radius:
        return s.copy()
    return ball.center + (ball.radius / dist) * offset


def contains(x, box: Union[BoxSet, BallSet], tol: float = 0.0) -> bool:
    """
    Check membership with an absolute tolerance band.

    Args:
        x: Point to test
        box: Box (componentwise test) or ball (radial test)
        tol: Nonnegative tolerance

    Returns:
        True iff lower − tol ≤ x ≤ upper + tol componentwise
    """
    if tol < 0:
        raise ValueError(f"Tolerance must be nonnegative, got {tol}")
    x = np.asarray(x, dtype=float)
    _check_dim(x, box.dim)

    if isinstance(box, BallSet):
        return bool(np.linalg.norm(x - box.center) <= box.radius + tol)
    return bool(np.all(x >= box.lower - tol) and np.all(x <= box.upper + tol))
