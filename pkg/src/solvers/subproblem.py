"""
Regularized Gauss-Newton subproblem.

Computes T_M(x) = argmin_{y ∈ C} ‖r + J(y − x)‖ + (M/2)‖y − x‖² by
projected gradient ascent on the dual

    φ(s) = min_{y ∈ C} ⟨s, r + J(y − x)⟩ + (M/2)‖y − x‖²,   ‖s‖ ≤ 1,

whose inner minimizer has the closed form y*(s) = Π_C(x − Jᵀs / M).
The duality gap certifies the accuracy of every returned point.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..sets.feasible import BallSet, BoxSet, project_ball, project_box
from ..utils.linalg import spectral_norm


logger = logging.getLogger(__name__)

DEFAULT_GAP_TOL = 1e-10
DEFAULT_MAX_INNER = 10_000


@dataclass(frozen=True, eq=False)
class SubproblemInstance:
    """
    Data of one subproblem.

    Attributes:
        r: Residual F(x), length m
        J: Jacobian ∇F(x), shape (m, n)
        x: Base point, length n
        M: Regularization weight (> 0)
        box: Feasible box C
    """
    r: np.ndarray
    J: np.ndarray
    x: np.ndarray
    M: float
    box: BoxSet

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).reshape(-1)
        J = np.atleast_2d(np.asarray(self.J, dtype=float))
        x = np.asarray(self.x, dtype=float).reshape(-1)

        if not self.M > 0:
            raise ValueError(f"Regularization M must be positive, got {self.M}")
        if J.shape != (r.size, x.size):
            raise ValueError(f"Jacobian shape {J.shape} does not match r ({r.size}) and x ({x.size})")
        if self.box.dim != x.size:
            raise ValueError(f"Box dimension {self.box.dim} does not match x ({x.size})")

        object.__setattr__(self, 'r', r)
        object.__setattr__(self, 'J', J)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'M', float(self.M))


@dataclass(frozen=True, eq=False)
class SubproblemSolution:
    """
    Certified approximate solution of one subproblem.

    Attributes:
        y: Primal point y*(s) in C
        s: Dual vector with ‖s‖ ≤ 1
        primal_value: Ψ_M(y; x)
        dual_value: φ(s)
        gap: primal_value − dual_value
        inner_iters: Ascent steps taken
        converged: False when max_inner ran out with the gap above tolerance
    """
    y: np.ndarray
    s: np.ndarray
    primal_value: float
    dual_value: float
    gap: float
    inner_iters: int
    converged: bool = True


class _DualPoint(NamedTuple):
    y: np.ndarray
    g: np.ndarray
    primal: float
    dual: float
    gap: float


def primal_value(inst: SubproblemInstance, y) -> float:
    """
    Ψ_M(y; x) = ‖r + J(y − x)‖ + (M/2)‖y − x‖².
    """
    d = np.asarray(y, dtype=float) - inst.x
    return float(np.linalg.norm(inst.r + inst.J @ d) + 0.5 * inst.M * (d @ d))


def dual_map(inst: SubproblemInstance, s) -> np.ndarray:
    """
    Inner minimizer y*(s) = Π_C(x − Jᵀs / M).
    """
    s = np.asarray(s, dtype=float)
    return project_box(inst.x - (inst.J.T @ s) / inst.M, inst.box)


def dual_value(inst: SubproblemInstance, s) -> float:
    """
    φ(s) = ⟨s, r + J(y*(s) − x)⟩ + (M/2)‖y*(s) − x‖².
    """
    return _evaluate(inst, s).dual


def _evaluate(inst: SubproblemInstance, s: np.ndarray) -> _DualPoint:
    y = dual_map(inst, s)
    d = y - inst.x
    g = inst.r + inst.J @ d
    reg = 0.5 * inst.M * float(d @ d)
    g_norm = float(np.linalg.norm(g))
    s_dot_g = float(s @ g)
    # primal − dual with the shared regularization cancelled exactly
    return _DualPoint(y, g, g_norm + reg, s_dot_g + reg, g_norm - s_dot_g)


def solve_subproblem(inst: SubproblemInstance, gap_tol: float = DEFAULT_GAP_TOL,
                     max_inner: int = DEFAULT_MAX_INNER,
                     accelerated: bool = False) -> SubproblemSolution:
    """
    Solve the subproblem by projected gradient ascent on the dual.

    The ascent step is η = M / ‖J‖₂², the inverse Lipschitz constant of the
    dual gradient r + J(y*(s) − x). The loop stops once the duality gap is
    at most gap_tol · max(1, ‖r‖).

    Args:
        inst: Subproblem data
        gap_tol: Relative duality-gap tolerance
        max_inner: Ascent step budget
        accelerated: Use momentum with function-value restart

    Returns:
        SubproblemSolution; converged is False when the budget ran out
    """
    if not gap_tol > 0:
        raise ValueError(f"gap_tol must be positive, got {gap_tol}")

    r_norm = float(np.linalg.norm(inst.r))
    ball = BallSet.unit(inst.r.size)
    s = inst.r / max(r_norm, 1.0)

    j_norm = spectral_norm(inst.J)
    if j_norm == 0.0:
        # y*(s) = Π_C(x) for every s; s = r/‖r‖ attains the primal value
        s = inst.r / r_norm if r_norm > 0 else np.zeros_like(inst.r)
        point = _evaluate(inst, s)
        return SubproblemSolution(point.y, s, point.primal, point.dual, 0.0, 0, True)

    eta = inst.M / j_norm ** 2
    threshold = gap_tol * max(1.0, r_norm)

    point = _evaluate(inst, s)
    s_prev = s
    t = 1.0
    iters = 0
    converged = point.gap <= threshold

    while not converged and iters < max_inner:
        if accelerated:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            z = s + ((t - 1.0) / t_next) * (s - s_prev)
            s_new = project_ball(z + eta * _evaluate(inst, z).g, ball)
            new_point = _evaluate(inst, s_new)
            if new_point.dual < point.dual:
                t_next = 1.0
                s_new = project_ball(s + eta * point.g, ball)
                new_point = _evaluate(inst, s_new)
            t = t_next
        else:
            s_new = project_ball(s + eta * point.g, ball)
            new_point = _evaluate(inst, s_new)

        s_prev, s, point = s, s_new, new_point
        iters += 1
        converged = point.gap <= threshold

    if not converged:
        logger.debug(f"Subproblem stopped after {iters} steps with gap {point.gap:.3e} "
                     f"(threshold {threshold:.3e})")

    return SubproblemSolution(
        y=point.y,
        s=s,
        primal_value=point.primal,
        dual_value=point.dual,
        gap=point.gap,
        inner_iters=iters,
        converged=converged,
    )
