"""
Linear algebra helpers shared by the solvers.
"""

import numpy as np


def spectral_norm(matrix: np.ndarray, max_iter: int = 500, tol: float = 1e-12,
                  seed: int = 0) -> float:
    """
    Estimate the largest singular value of a dense matrix by power iteration.

    Iterates on AᵀA from a seeded random start vector so that structured
    null directions (e.g. the all-ones vector) cannot stall the estimate.

    Args:
        matrix: Dense matrix of shape (m, n)
        max_iter: Iteration cap
        tol: Relative change in the estimate that stops the iteration
        seed: Seed for the start vector

    Returns:
        Estimate of ‖A‖₂ (0.0 for a zero matrix)
    """
    a = np.asarray(matrix, dtype=float)
    if a.size == 0 or not np.any(a):
        return 0.0

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(a.shape[1])
    v /= np.linalg.norm(v)

    estimate = 0.0
    for _ in range(max_iter):
        w = a.T @ (a @ v)
        w_norm = np.linalg.norm(w)
        if w_norm == 0.0:
            # start vector landed in the null space
            return float(np.linalg.norm(a, 2))
        v = w / w_norm
        new_estimate = float(np.sqrt(w_norm))
        if abs(new_estimate - estimate) <= tol * new_estimate:
            estimate = new_estimate
            break
        estimate = new_estimate

    return float(np.linalg.norm(a @ v))
