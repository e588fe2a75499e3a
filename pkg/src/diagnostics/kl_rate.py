"""
Convergence-rate classification for merit traces.

Fits the tail of f_k − f_* against a geometric model (log δ_k linear in k)
and a power model (log δ_k linear in log k) and reports which one explains
the data better. A tail whose contraction factors keep shrinking fits
neither well and is reported as linear with its largest factor. Results
are observations about a trace; nothing here certifies a KL inequality.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats


logger = logging.getLogger(__name__)

LINEAR = 'linear'
SUBLINEAR = 'sublinear'
STALLED = 'stalled'
INCONCLUSIVE = 'inconclusive'

MIN_TAIL_POINTS = 5
MIN_R2 = 0.9
STALL_RATIO = 0.99
MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class RateFit:
    """
    Fitted decay regime of a trace tail.

    Attributes:
        regime: linear, sublinear, stalled or inconclusive
        rate: Contraction factor (linear) or power exponent (sublinear), 0 otherwise
        r2: Coefficient of determination of the selected model
        window: Inclusive index range (first, last) of the values used
    """
    regime: str
    rate: float
    r2: float
    window: Tuple[int, int]

    @property
    def implied_kl_exponent(self) -> Optional[float]:
        """
        Exponent q with q/(2 − q) equal to the fitted power, for sublinear fits.

        A geometric tail corresponds to q = 2 and is reported as such.
        """
        if self.regime == LINEAR:
            return 2.0
        if self.regime == SUBLINEAR:
            return 2.0 * self.rate / (1.0 + self.rate)
        return None


def fit_kl_rate(values: Sequence[float], f_star: float = 0.0,
                tail_fraction: float = 0.5) -> RateFit:
    """
    Classify the decay of f_k − f_* on the tail of a trace.

    The value at position i is treated as iteration k = i + 1 for the power
    model, so a sequence 1, 1/2, 1/3, ... has exponent 1. Entries with
    f_k − f_* ≤ 0 carry no logarithm and are skipped.

    Args:
        values: Merit values f_0, f_1, ... (nonincreasing)
        f_star: Optimal value, at most min(values)
        tail_fraction: Share of the trace, counted from the end, used for the fit

    Returns:
        RateFit for the tail window

    Raises:
        ValueError: If tail_fraction is outside (0, 1], f_star exceeds the
            minimum value, or the values increase
    """
    f = np.asarray(values, dtype=float).reshape(-1)
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    if f.size == 0:
        return RateFit(INCONCLUSIVE, 0.0, 0.0, (0, -1))
    if not np.all(np.isfinite(f)):
        raise ValueError("Merit values must be finite")
    if f_star > f.min() + MONOTONE_TOL:
        raise ValueError(f"f_star={f_star} exceeds the smallest value {f.min()}")
    if np.any(np.diff(f) > MONOTONE_TOL):
        raise ValueError("Merit values must be nonincreasing")

    start = int(np.floor(f.size * (1.0 - tail_fraction)))
    window = (start, f.size - 1)
    k = np.arange(start, f.size, dtype=float) + 1.0
    gap = f[start:] - f_star
    keep = gap > 0
    k, gap = k[keep], gap[keep]

    if gap.size < MIN_TAIL_POINTS:
        logger.debug(f"Only {gap.size} positive tail points, fit inconclusive")
        return RateFit(INCONCLUSIVE, 0.0, 0.0, window)

    if gap[-1] >= STALL_RATIO * gap[0]:
        return RateFit(STALLED, 1.0, 0.0, window)

    log_gap = np.log(gap)
    geometric = stats.linregress(k, log_gap)
    power = stats.linregress(np.log(k), log_gap)
    r2_geometric = geometric.rvalue ** 2
    r2_power = power.rvalue ** 2
    logger.debug(f"Rate fit on {window}: geometric r2={r2_geometric:.6f}, power r2={r2_power:.6f}")

    if max(r2_geometric, r2_power) < MIN_R2:
        ratios = gap[1:] / gap[:-1]
        if np.all(ratios < 1.0) and np.all(np.diff(ratios) <= 0.0):
            # contraction factors only shrink: superlinear, bounded by the first factor
            return RateFit(LINEAR, float(ratios[0]), float(r2_geometric), window)
        return RateFit(INCONCLUSIVE, 0.0, float(max(r2_geometric, r2_power)), window)

    if r2_geometric >= r2_power:
        contraction = float(np.exp(geometric.slope))
        if 0.0 < contraction < 1.0:
            return RateFit(LINEAR, contraction, float(r2_geometric), window)
    else:
        exponent = float(-power.slope)
        if exponent > 0.0:
            return RateFit(SUBLINEAR, exponent, float(r2_power), window)

    return RateFit(INCONCLUSIVE, 0.0, float(max(r2_geometric, r2_power)), window)
