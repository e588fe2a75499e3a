"""
Projected gradient descent baseline.

Minimizes the smooth objective g(x) = ½‖F(x)‖² over a box with
x⁺ = Π_C(x − α∇F(x)ᵀF(x)), using either a fixed step or backtracking on
the projected sufficient-decrease test g(x⁺) ≤ g(x) − (c/α)‖x⁺ − x‖².
"""

import configparser
import logging
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..models.residual import NonFiniteResidualError, ResidualModel, merit_value
from ..sets.feasible import BoxSet, contains, project_box
from .results import IterateTrace, IterationRecord, SolveResult, SolveStatus


logger = logging.getLogger(__name__)

MIN_STEP = 1e-16


@dataclass(frozen=True)
class PgdConfig:
    """
    Parameters of the projected gradient baseline.

    Attributes:
        step_mode: 'backtracking' or 'fixed'
        alpha: Fixed step, or the initial trial step when backtracking
        beta: Backtracking shrink factor in (0, 1)
        c: Sufficient-decrease constant in (0, 1)
        merit_tol: Stop once ‖F(x_k)‖ ≤ merit_tol
        step_tol: Stop once ‖x⁺ − x‖ ≤ step_tol (projected stationarity)
        max_outer: Iteration cap
    """
    step_mode: str = 'backtracking'
    alpha: float = 1.0
    beta: float = 0.5
    c: float = 1e-4
    merit_tol: float = 1e-3
    step_tol: float = 0.0
    max_outer: int = 5000

    def __post_init__(self):
        if self.step_mode not in ('backtracking', 'fixed'):
            raise ValueError(f"Unknown step mode '{self.step_mode}' (use backtracking or fixed)")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if not 0 < self.c < 1:
            raise ValueError(f"c must lie in (0, 1), got {self.c}")
        if not self.merit_tol > 0:
            raise ValueError(f"merit_tol must be positive, got {self.merit_tol}")
        if self.step_tol < 0 or self.max_outer < 0:
            raise ValueError("step_tol and max_outer must be nonnegative")

    @classmethod
    def from_settings(cls, config: configparser.ConfigParser, **overrides) -> 'PgdConfig':
        """Build from the [PGD] section of settings.ini; non-None overrides win."""
        values = dict(
            step_mode=config.get('PGD', 'step_mode', fallback=cls.step_mode),
            alpha=config.getfloat('PGD', 'alpha', fallback=cls.alpha),
            beta=config.getfloat('PGD', 'beta', fallback=cls.beta),
            c=config.getfloat('PGD', 'c', fallback=cls.c),
            merit_tol=config.getfloat('PGD', 'merit_tol', fallback=cls.merit_tol),
            step_tol=config.getfloat('PGD', 'step_tol', fallback=cls.step_tol),
            max_outer=config.getint('PGD', 'max_outer', fallback=cls.max_outer),
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def pgd_step(model: ResidualModel, box: BoxSet, x, alpha: float) -> np.ndarray:
    """
    One projected gradient step on ½‖F(x)‖².

    Args:
        model: Residual model
        box: Feasible box
        x: Current iterate
        alpha: Step size (> 0)

    Returns:
        Π_C(x − α∇F(x)ᵀF(x))
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    x = np.asarray(x, dtype=float)
    gradient = model.jacobian_at(x).T @ model.evaluate(x)
    return project_box(x - alpha * gradient, box)


def _safe_merit(model: ResidualModel, x: np.ndarray) -> float:
    try:
        return merit_value(model, x)
    except NonFiniteResidualError:
        return float('inf')


def solve_pgd(model: ResidualModel, box: BoxSet, x0, cfg: Optional[PgdConfig] = None,
              clock: Callable[[], float] = time.perf_counter) -> SolveResult:
    """
    Run projected gradient descent.

    In backtracking mode the trial step is halved (by beta) until the
    projected sufficient-decrease test holds and doubled after every
    accepted step. Trace rows use the shared columns: M = 1/α,
    ls_doublings = number of shrinks, stat_surrogate = ‖x⁺ − x‖/α.

    Args:
        model: Residual model
        box: Feasible box
        x0: Starting point (projected when infeasible)
        cfg: Solver configuration
        clock: Time source in seconds

    Returns:
        SolveResult; a step underflow stops with max-iters and the
        'step-underflow' flag
    """
    cfg = cfg or PgdConfig()
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
    f = merit_value(model, x)
    trace.append(IterationRecord(iter=0, f=f))
    alpha = cfg.alpha
    k = 0
    logger.info(f"PGD on {model.name}: mode={cfg.step_mode}, f0={f:.6e}")

    while True:
        if f <= cfg.merit_tol:
            status = SolveStatus.MERIT_CONVERGED
            break
        if k >= cfg.max_outer:
            status = SolveStatus.MAX_ITERS
            break

        r = model.evaluate(x)
        gradient = model.jacobian_at(x).T @ r
        g_x = 0.5 * f * f
        shrinks = 0

        while True:
            x_new = project_box(x - alpha * gradient, box)
            step = x_new - x
            f_new = _safe_merit(model, x_new)
            g_new = 0.5 * f_new * f_new
            if cfg.step_mode == 'fixed' or g_new <= g_x - (cfg.c / alpha) * float(step @ step):
                break
            alpha *= cfg.beta
            shrinks += 1
            if alpha < MIN_STEP:
                break

        if alpha < MIN_STEP:
            logger.warning(f"PGD step underflow at iteration {k}")
            flags.append('step-underflow')
            status = SolveStatus.MAX_ITERS
            break
        if not np.isfinite(g_new):
            logger.warning(f"PGD produced a non-finite residual at iteration {k + 1}")
            status = SolveStatus.MAX_ITERS
            flags.append('non-finite')
            break

        step_norm = float(np.linalg.norm(step))
        k += 1
        trace.append(IterationRecord(
            iter=k,
            f=f_new,
            step_norm=step_norm,
            M=1.0 / alpha,
            ls_doublings=shrinks,
            stat_surrogate=step_norm / alpha,
            time_ms=1000.0 * (clock() - start),
        ))
        logger.debug(f"iter {k}: f={f_new:.6e} step={step_norm:.3e} alpha={alpha:.3e} shrinks={shrinks}")

        x, f = x_new, f_new
        if step_norm <= cfg.step_tol:
            status = SolveStatus.STEP_CONVERGED
            break
        if cfg.step_mode == 'backtracking':
            alpha *= 2.0

    logger.info(f"PGD finished: {status.value} after {k} iterations, f={f:.6e}")
    return SolveResult(x_final=x, status=status, trace=trace, flags=flags)
