"""
Analytic residual models with known structure.

Small closed-form problems used to exercise the solvers: linear least
squares, a componentwise half-square with a known Jacobian Lipschitz
constant, and a linear map with a cubic perturbation.
"""

from typing import Optional

import numpy as np

from .residual import ResidualModel


def linear_model(A, b, name: str = "linear") -> ResidualModel:
    """
    F(x) = A x − b.

    The Jacobian is constant, so no Lipschitz hint is attached.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if b.size != A.shape[0]:
        raise ValueError(f"b has length {b.size}, A has {A.shape[0]} rows")

    return ResidualModel(
        n=A.shape[1],
        m=A.shape[0],
        residual=lambda x: A @ x - b,
        jacobian=lambda x: A.copy(),
        name=name,
    )


def half_square_model(targets, name: str = "half-square") -> ResidualModel:
    """
    F_i(x) = x_i² / 2 − t_i.

    ∇F(x) = diag(x), whose spectral-norm Lipschitz constant is exactly 1.
    """
    targets = np.asarray(targets, dtype=float).reshape(-1)

    return ResidualModel(
        n=targets.size,
        m=targets.size,
        residual=lambda x: 0.5 * x ** 2 - targets,
        jacobian=lambda x: np.diag(x),
        lipschitz_hint=1.0,
        name=name,
    )


def cubic_perturbed_model(A, b, eps: float = 0.1, radius: Optional[float] = None,
                          name: str = "cubic-perturbed") -> ResidualModel:
    """
    F(x) = A x − b + eps · x³ (elementwise cube on the first n rows).

    With more rows than columns and b outside the range of A, the least
    norm residual stays bounded away from zero.

    Args:
        A: Matrix of shape (m, n) with m ≥ n
        b: Vector of length m
        eps: Perturbation weight
        radius: Bound on |x_i| over the feasible box; when given, the
            Lipschitz hint 6·|eps|·radius is attached

    Returns:
        ResidualModel with analytic Jacobian A + 3·eps·diag(x²) on the top block
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    m, n = A.shape
    if m < n:
        raise ValueError(f"Cubic perturbation needs at least as many rows as columns, got {A.shape}")
    if b.size != m:
        raise ValueError(f"b has length {b.size}, A has {m} rows")

    hint = 6.0 * abs(eps) * radius if radius is not None and eps != 0 else None

    def residual(x):
        out = A @ x - b
        out[:n] += eps * x ** 3
        return out

    def jacobian(x):
        out = A.copy()
        out[:n] += np.diag(3.0 * eps * x ** 2)
        return out

    return ResidualModel(
        n=n,
        m=m,
        residual=residual,
        jacobian=jacobian,
        lipschitz_hint=hint,
        name=name,
    )
