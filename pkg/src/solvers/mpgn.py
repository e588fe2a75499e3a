"""
Modified projected Gauss-Newton method.

Outer loop for min_{x ∈ C} ‖F(x)‖: each iterate is the regularized
Gauss-Newton point x_{k+1} = T_{M_k}(x_k), with M_k found by doubling
until the sufficient-decrease test

    (δ/2)‖y − x‖² ≤ Ψ_M(y; x) − ‖F(y)‖

holds, and halved (down to the floor L₀) before the next iteration.
"""

import configparser
import logging
import time
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from ..models.residual import NonFiniteResidualError, ResidualModel, merit_value
from ..sets.feasible import BoxSet, contains, project_box
from .results import IterateTrace, IterationRecord, SolveResult, SolveStatus
from .subproblem import (DEFAULT_GAP_TOL, DEFAULT_MAX_INNER, SubproblemInstance,
                         SubproblemSolution, solve_subproblem)


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MpgnConfig:
    """
    Parameters of the outer MPG-N loop.

    Attributes:
        delta: Descent margin δ
        l0: Floor L₀ for the regularization M_k
        m_init: Starting regularization M₀
        merit_tol: Stop once ‖F(x_k)‖ ≤ merit_tol
        step_tol: Stop once ‖x_{k+1} − x_k‖ ≤ step_tol
        max_outer: Outer iteration cap
        gap_tol: Relative duality-gap tolerance of each subproblem
        max_inner: Inner iteration budget of each subproblem
        accelerated: Momentum variant of the dual ascent
        retry_factor: Budget multiplier for the single retry of a flagged subproblem
        max_doublings: Safety cap on line-search doublings per iteration
        line_search: False solves one subproblem per iteration at the constant
            M = m_init, with no doubling or halving (valid when m_init ≥ L_F + δ)
    """
    delta: float = 1e-4
    l0: float = 1e-4
    m_init: float = 1.0
    merit_tol: float = 1e-3
    step_tol: float = 1e-10
    max_outer: int = 5000
    gap_tol: float = DEFAULT_GAP_TOL
    max_inner: int = DEFAULT_MAX_INNER
    accelerated: bool = False
    retry_factor: int = 10
    max_doublings: int = 60
    line_search: bool = True

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not self.l0 > 0:
            raise ValueError(f"l0 must be positive, got {self.l0}")
        if not self.m_init >= self.l0:
            raise ValueError(f"m_init ({self.m_init}) must be at least l0 ({self.l0})")
        for name in ('merit_tol', 'step_tol', 'gap_tol'):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.max_outer < 0 or self.max_inner < 1 or self.retry_factor < 1:
            raise ValueError("Iteration budgets must be positive")

    @classmethod
    def from_settings(cls, config: configparser.ConfigParser, **overrides) -> 'MpgnConfig':
        """
        Build from the [MPGN] and [SUBPROBLEM] sections of settings.ini.

        Args:
            config: Loaded settings
            **overrides: Values taking precedence over the file (None is ignored)

        Returns:
            MpgnConfig
        """
        values = dict(
            delta=config.getfloat('MPGN', 'delta', fallback=cls.delta),
            l0=config.getfloat('MPGN', 'l0', fallback=cls.l0),
            m_init=config.getfloat('MPGN', 'm0', fallback=cls.m_init),
            merit_tol=config.getfloat('MPGN', 'merit_tol', fallback=cls.merit_tol),
            step_tol=config.getfloat('MPGN', 'step_tol', fallback=cls.step_tol),
            max_outer=config.getint('MPGN', 'max_outer', fallback=cls.max_outer),
            max_doublings=config.getint('MPGN', 'max_doublings', fallback=cls.max_doublings),
            line_search=config.getboolean('MPGN', 'line_search', fallback=cls.line_search),
            gap_tol=config.getfloat('SUBPROBLEM', 'gap_tol', fallback=cls.gap_tol),
            max_inner=config.getint('SUBPROBLEM', 'max_inner', fallback=cls.max_inner),
            accelerated=config.getboolean('SUBPROBLEM', 'accelerated', fallback=cls.accelerated),
            retry_factor=config.getint('SUBPROBLEM', 'retry_factor', fallback=cls.retry_factor),
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class LineSearchStep(NamedTuple):
    """Outcome of one adaptive search for M_k."""
    y: np.ndarray
    M_accepted: float
    M_next: float
    doublings: int
    solution: Optional[SubproblemSolution]
    merit: float
    retried: bool = False
    failed: bool = False


def descent_condition(model: ResidualModel, box: BoxSet, x, y, M: float, delta: float,
                      psi_at_y: float) -> bool:
    """
    Sufficient-decrease test (δ/2)‖y − x‖² ≤ Ψ_M(y; x) − ‖F(y)‖.

    The indicator of C vanishes because y = T_M(x) lies in C.

    Args:
        model: Residual model
        box: Feasible box
        x: Current iterate
        y: Candidate T_M(x)
        M: Regularization used for y
        delta: Descent margin δ
        psi_at_y: Subproblem objective value at y

    Returns:
        True when the test holds
    """
    accepted, _ = _check_descent(model, x, y, delta, psi_at_y)
    return accepted


def _check_descent(model: ResidualModel, x, y, delta: float, psi_at_y: float):
    d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    try:
        f_y = merit_value(model, y)
    except NonFiniteResidualError:
        return False, float('inf')
    return 0.5 * delta * float(d @ d) <= psi_at_y - f_y, f_y


def _solve_with_retry(inst: SubproblemInstance, cfg: MpgnConfig):
    solution = solve_subproblem(inst, cfg.gap_tol, cfg.max_inner, cfg.accelerated)
    if solution.converged:
        return solution, False

    budget = cfg.max_inner * cfg.retry_factor
    logger.info(f"Subproblem gap {solution.gap:.3e} above tolerance at M={inst.M:.4g}, "
                f"retrying with {budget} inner steps")
    return solve_subproblem(inst, cfg.gap_tol, budget, cfg.accelerated), True


def line_search_step(model: ResidualModel, box: BoxSet, x, M_in: float, cfg: MpgnConfig,
                     r: Optional[np.ndarray] = None, J: Optional[np.ndarray] = None,
                     f_x: Optional[float] = None) -> LineSearchStep:
    """
    Find M ≥ M_in satisfying the descent test by doubling.

    With cfg.line_search off this is a single subproblem at M = m_init,
    accepted whether or not the test holds.

    Args:
        model: Residual model
        box: Feasible box
        x: Current (feasible) iterate
        M_in: Starting regularization (at least cfg.l0)
        cfg: Solver configuration
        r: F(x) if already evaluated
        J: ∇F(x) if already evaluated
        f_x: ‖F(x)‖ if already evaluated

    Returns:
        LineSearchStep with the accepted point, M and the next starting M
    """
    if M_in < cfg.l0:
        raise ValueError(f"M_in ({M_in}) is below the floor l0 ({cfg.l0})")

    x = np.asarray(x, dtype=float)
    r = model.evaluate(x) if r is None else r
    J = model.jacobian_at(x) if J is None else J
    f_x = float(np.linalg.norm(r)) if f_x is None else f_x

    if not cfg.line_search:
        return _fixed_step(model, box, x, cfg, r, J, f_x)

    M = float(M_in)
    doublings = 0
    retried = False

    while True:
        solution, was_retried = _solve_with_retry(SubproblemInstance(r, J, x, M, box), cfg)
        retried = retried or was_retried
        if not solution.converged:
            logger.warning(f"Subproblem failed at M={M:.4g} (gap {solution.gap:.3e})")
            return LineSearchStep(x, M, M, doublings, solution, f_x, retried, failed=True)

        y, psi = solution.y, solution.primal_value
        if psi > f_x:
            # staying at x is certified optimal within the duality gap
            y, psi = x, f_x

        accepted, f_y = _check_descent(model, x, y, cfg.delta, psi)
        if accepted:
            break

        if doublings >= cfg.max_doublings:
            logger.warning(f"Line search exceeded {cfg.max_doublings} doublings (M={M:.4g})")
            return LineSearchStep(x, M, M, doublings, solution, f_x, retried, failed=True)
        M *= 2.0
        doublings += 1

    return LineSearchStep(y, M, max(M / 2.0, cfg.l0), doublings, solution, f_y, retried)


def _fixed_step(model: ResidualModel, box: BoxSet, x, cfg: MpgnConfig, r, J, f_x) -> LineSearchStep:
    """One plain modified Gauss-Newton step at M = m_init."""
    M = cfg.m_init
    solution, retried = _solve_with_retry(SubproblemInstance(r, J, x, M, box), cfg)
    if not solution.converged:
        logger.warning(f"Subproblem failed at M={M:.4g} (gap {solution.gap:.3e})")
        return LineSearchStep(x, M, M, 0, solution, f_x, retried, failed=True)

    y, psi = solution.y, solution.primal_value
    if psi > f_x:
        y, psi = x, f_x

    accepted, f_y = _check_descent(model, x, y, cfg.delta, psi)
    if not np.isfinite(f_y):
        logger.warning(f"Residual not finite after a fixed step at M={M:.4g}")
        return LineSearchStep(x, M, M, 0, solution, f_x, retried, failed=True)
    if not accepted:
        logger.warning(f"Descent test fails at fixed M={M:.4g}; m_init is below L_F + delta")
    return LineSearchStep(y, M, M, 0, solution, f_y, retried)


def stationarity_surrogate(x_prev, x_next, M: float) -> float:
    """
    Surrogate M·‖x_next − x_prev‖ for the distance of the proximal point to stationarity.
    """
    return float(M * np.linalg.norm(np.asarray(x_next, dtype=float) - np.asarray(x_prev, dtype=float)))


def solve_mpgn(model: ResidualModel, box: BoxSet, x0, cfg: Optional[MpgnConfig] = None,
               clock: Callable[[], float] = time.perf_counter) -> SolveResult:
    """
    Run the modified projected Gauss-Newton method.

    An infeasible start is projected onto the box first; the projection
    distance is recorded on the trace.

    Args:
        model: Residual model
        box: Feasible box C
        x0: Starting point
        cfg: Solver configuration (defaults when None)
        clock: Time source in seconds for the trace's time column

    Returns:
        SolveResult with status, final point and iterate trace
    """
    cfg = cfg or MpgnConfig()
    trace = IterateTrace()
    flags = []

    x = np.asarray(x0, dtype=float)
    if not contains(x, box):
        projected = project_box(x, box)
        trace.initial_projection = float(np.linalg.norm(projected - x))
        logger.warning(f"Start point infeasible, projected by {trace.initial_projection:.6g}")
        flags.append('projected-start')
        x = projected

    start = clock()
    r = model.evaluate(x)
    f = merit_value(model, x)
    trace.append(IterationRecord(iter=0, f=f))

    M = cfg.m_init
    k = 0
    logger.info(f"MPG-N on {model.name}: n={model.n}, m={model.m}, f0={f:.6e}")

    while True:
        if f <= cfg.merit_tol:
            status = SolveStatus.MERIT_CONVERGED
            break
        if k >= cfg.max_outer:
            status = SolveStatus.MAX_ITERS
            break

        step = line_search_step(model, box, x, M, cfg, r=r, J=model.jacobian_at(x), f_x=f)
        if step.retried and 'subproblem-retry' not in flags:
            flags.append('subproblem-retry')
        if step.failed:
            status = SolveStatus.SUBPROBLEM_FAILURE
            break

        step_norm = float(np.linalg.norm(step.y - x))
        k += 1
        trace.append(IterationRecord(
            iter=k,
            f=step.merit,
            step_norm=step_norm,
            M=step.M_accepted,
            ls_doublings=step.doublings,
            sub_gap=step.solution.gap,
            sub_iters=step.solution.inner_iters,
            stat_surrogate=stationarity_surrogate(x, step.y, step.M_accepted),
            time_ms=1000.0 * (clock() - start),
        ))
        if cfg.line_search:
            assert step.merit <= f + 1e-12, f"merit increased at iteration {k}: {f} -> {step.merit}"

        logger.debug(f"iter {k}: f={step.merit:.6e} step={step_norm:.3e} M={step.M_accepted:.4g} "
                     f"doublings={step.doublings} gap={step.solution.gap:.2e} "
                     f"inner={step.solution.inner_iters}")

        x, f = step.y, step.merit
        r = model.evaluate(x)
        M = step.M_next

        if step_norm <= cfg.step_tol:
            status = SolveStatus.STEP_CONVERGED
            break

    logger.info(f"MPG-N finished: {status.value} after {k} iterations, f={f:.6e}")
    return SolveResult(x_final=x, status=status, trace=trace, flags=flags)
