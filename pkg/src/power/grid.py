"""
AC power-flow residual model.

This module evaluates the active and reactive bus injections

    p_i = Σ_k u_i u_k (G_ik cos θ_ik + B_ik sin θ_ik)
    q_i = Σ_k u_i u_k (G_ik sin θ_ik − B_ik cos θ_ik),   θ_ik = θ_i − θ_k,

their analytic Jacobian, and packages the mismatch against a target
injection as a ResidualModel over the box of voltage magnitudes and angles.
Every bus keeps both u and θ free; no slack/PV/PQ typing is applied.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..data.case_reader import build_admittance
from ..data.data_models import CaseData
from ..models.residual import ResidualModel
from ..sets.feasible import BoxSet


logger = logging.getLogger(__name__)

DEFAULT_U_MIN = 0.9
DEFAULT_U_MAX = 1.1
DEFAULT_ANGLE_SPREAD = 0.2


@dataclass(frozen=True, eq=False)
class PowerSystem:
    """
    Network data in per-unit.

    Attributes:
        G: Conductance matrix (N×N)
        B: Susceptance matrix (N×N)
        u_min: Per-bus lower voltage-magnitude bound
        u_max: Per-bus upper voltage-magnitude bound
        name: Case label
    """
    G: np.ndarray
    B: np.ndarray
    u_min: np.ndarray
    u_max: np.ndarray
    name: str = "system"

    def __post_init__(self):
        G = np.array(self.G, dtype=float)
        B = np.array(self.B, dtype=float)
        n = G.shape[0]
        if G.shape != (n, n) or B.shape != (n, n):
            raise ValueError(f"G and B must be square of equal size, got {G.shape} and {B.shape}")

        u_min = np.broadcast_to(np.asarray(self.u_min, dtype=float), (n,)).copy()
        u_max = np.broadcast_to(np.asarray(self.u_max, dtype=float), (n,)).copy()
        if np.any(u_min <= 0):
            raise ValueError("Voltage-magnitude lower bounds must be positive")
        if np.any(u_min > u_max):
            raise ValueError("Voltage-magnitude bounds are inverted")

        for array in (G, B, u_min, u_max):
            array.setflags(write=False)
        object.__setattr__(self, 'G', G)
        object.__setattr__(self, 'B', B)
        object.__setattr__(self, 'u_min', u_min)
        object.__setattr__(self, 'u_max', u_max)

    @classmethod
    def from_case(cls, case: CaseData, u_min: float = DEFAULT_U_MIN, u_max: float = DEFAULT_U_MAX,
                  use_case_bounds: bool = False) -> 'PowerSystem':
        """
        Assemble a system from parsed case data.

        Args:
            case: Parsed case
            u_min: Lower magnitude bound of the default band
            u_max: Upper magnitude bound of the default band
            use_case_bounds: Take VMIN/VMAX from the case where present

        Returns:
            PowerSystem
        """
        G, B = build_admittance(case)
        lower = np.full(case.n_bus, u_min)
        upper = np.full(case.n_bus, u_max)
        if use_case_bounds:
            for i, bus in enumerate(case.buses):
                if bus.vmin is not None and bus.vmax is not None and 0 < bus.vmin <= bus.vmax:
                    lower[i], upper[i] = bus.vmin, bus.vmax
        system = cls(G, B, lower, upper, name=case.name)
        logger.info(f"Assembled {case.name}: N={case.n_bus}, "
                    f"u in [{lower.min():.3f}, {upper.max():.3f}]")
        if not system.is_symmetric():
            logger.info(f"{case.name}: admittance is not symmetric (phase shifters present)")
        return system

    @property
    def N(self) -> int:
        return self.G.shape[0]

    def admittance(self) -> np.ndarray:
        return self.G + 1j * self.B

    def feasible_set(self) -> BoxSet:
        """Box u ∈ [u_min, u_max], θ ∈ [−π, π] in the flattened ordering (u, θ)."""
        return BoxSet(
            np.concatenate([self.u_min, np.full(self.N, -np.pi)]),
            np.concatenate([self.u_max, np.full(self.N, np.pi)]),
        )

    def sampling_set(self, angle_spread: float = DEFAULT_ANGLE_SPREAD) -> BoxSet:
        """
        Sub-box of the feasible set used for random operating points.

        Magnitudes keep the full band; angles are limited to
        [−angle_spread, angle_spread].

        Args:
            angle_spread: Half-width of the angle interval in radians, in (0, π]

        Returns:
            BoxSet contained in feasible_set()
        """
        if not 0 < angle_spread <= np.pi:
            raise ValueError(f"angle_spread must lie in (0, pi], got {angle_spread}")
        return BoxSet(
            np.concatenate([self.u_min, np.full(self.N, -angle_spread)]),
            np.concatenate([self.u_max, np.full(self.N, angle_spread)]),
        )

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.G - self.G.T), initial=0.0) <= tol
                    and np.max(np.abs(self.B - self.B.T), initial=0.0) <= tol)


@dataclass(frozen=True, eq=False)
class VoltageState:
    """
    Bus voltages in polar form.

    Attributes:
        u: Magnitudes (p.u.)
        theta: Angles (radians)
    """
    u: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).reshape(-1)
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if u.shape != theta.shape:
            raise ValueError(f"u and theta lengths differ: {u.size} vs {theta.size}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(theta))):
            raise ValueError("Voltage state contains non-finite entries")
        object.__setattr__(self, 'u', u)
        object.__setattr__(self, 'theta', theta)

    @classmethod
    def from_vector(cls, x) -> 'VoltageState':
        """Split the flattened vector x = (u₁..u_N, θ₁..θ_N)."""
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.size % 2:
            raise ValueError(f"Flattened state needs even length, got {x.size}")
        half = x.size // 2
        return cls(x[:half], x[half:])

    @classmethod
    def flat(cls, n: int) -> 'VoltageState':
        """All magnitudes 1 p.u., all angles 0."""
        return cls(np.ones(n), np.zeros(n))

    @property
    def N(self) -> int:
        return self.u.size

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.theta])

    def phasors(self) -> np.ndarray:
        return self.u * np.exp(1j * self.theta)


@dataclass(frozen=True, eq=False)
class PowerTarget:
    """
    Target injections s = s_R + j·s_I in per-unit.

    Attributes:
        s_R: Active-power targets
        s_I: Reactive-power targets
    """
    s_R: np.ndarray
    s_I: np.ndarray

    def __post_init__(self):
        s_R = np.asarray(self.s_R, dtype=float).reshape(-1)
        s_I = np.asarray(self.s_I, dtype=float).reshape(-1)
        if s_R.shape != s_I.shape:
            raise ValueError(f"s_R and s_I lengths differ: {s_R.size} vs {s_I.size}")
        if not (np.all(np.isfinite(s_R)) and np.all(np.isfinite(s_I))):
            raise ValueError("Target injections must be finite")
        object.__setattr__(self, 's_R', s_R)
        object.__setattr__(self, 's_I', s_I)


def _check_state(system: PowerSystem, state: VoltageState) -> None:
    if state.N != system.N:
        raise ValueError(f"State has {state.N} buses, system has {system.N}")


def _angle_terms(system: PowerSystem, state: VoltageState):
    diff = state.theta[:, None] - state.theta[None, :]
    cos, sin = np.cos(diff), np.sin(diff)
    A = system.G * cos + system.B * sin
    D = system.G * sin - system.B * cos
    return A, D


def eval_power(system: PowerSystem, state: VoltageState) -> Tuple[np.ndarray, np.ndarray]:
    """
    Active and reactive injections at every bus.

    Args:
        system: Network data
        state: Voltage state

    Returns:
        Tuple (p, q)
    """
    _check_state(system, state)
    A, D = _angle_terms(system, state)
    u = state.u
    return u * (A @ u), u * (D @ u)


def eval_power_jacobian(system: PowerSystem, state: VoltageState) -> np.ndarray:
    """
    Jacobian of (p, q) with respect to (u, θ).

    With A_ik = G_ik cos θ_ik + B_ik sin θ_ik and D_ik = G_ik sin θ_ik − B_ik cos θ_ik:
        ∂p_i/∂u_k = u_i A_ik,        ∂p_i/∂u_i = Σ_{k≠i} u_k A_ik + 2u_i G_ii
        ∂p_i/∂θ_k = u_i u_k D_ik,    ∂p_i/∂θ_i = −Σ_{k≠i} u_i u_k D_ik
        ∂q_i/∂u_k = u_i D_ik,        ∂q_i/∂u_i = Σ_{k≠i} u_k D_ik − 2u_i B_ii
        ∂q_i/∂θ_k = −u_i u_k A_ik,   ∂q_i/∂θ_i = Σ_{k≠i} u_i u_k A_ik

    Args:
        system: Network data
        state: Voltage state

    Returns:
        2N×2N matrix [[∂p/∂u, ∂p/∂θ], [∂q/∂u, ∂q/∂θ]]
    """
    _check_state(system, state)
    A, D = _angle_terms(system, state)
    u = state.u
    uu = np.outer(u, u)

    # u_i·X_ik off the diagonal; the diagonal picks up Σ_k u_k X_ik + u_i X_ii
    dp_du = u[:, None] * A + np.diag(A @ u)
    dq_du = u[:, None] * D + np.diag(D @ u)

    dp_dtheta = uu * D
    np.fill_diagonal(dp_dtheta, 0.0)
    dp_dtheta -= np.diag(dp_dtheta.sum(axis=1))

    dq_dtheta = -uu * A
    np.fill_diagonal(dq_dtheta, 0.0)
    dq_dtheta -= np.diag(dq_dtheta.sum(axis=1))

    return np.block([[dp_du, dp_dtheta], [dq_du, dq_dtheta]])


def make_target(system: PowerSystem, x_star: VoltageState, tol: float = 1e-12) -> PowerTarget:
    """
    Target injections generated by a known feasible state.

    Args:
        system: Network data
        x_star: Feasible voltage state
        tol: Feasibility tolerance

    Returns:
        PowerTarget with s_R = p(x*), s_I = q(x*)

    Raises:
        ValueError: If x_star lies outside the box
    """
    _check_state(system, x_star)
    if not system.feasible_set().contains(x_star.to_vector(), tol):
        raise ValueError("Target state x* is not feasible for the voltage/angle box")
    p, q = eval_power(system, x_star)
    return PowerTarget(p, q)


def as_residual_model(system: PowerSystem, target: PowerTarget,
                      name: Optional[str] = None) -> ResidualModel:
    """
    Mismatch F(x) = (p(x) − s_R; q(x) − s_I) as a ResidualModel.

    The feasible box is system.feasible_set().

    Args:
        system: Network data
        target: Target injections
        name: Model label (defaults to the system name)

    Returns:
        ResidualModel with n = m = 2N
    """
    if target.s_R.size != system.N:
        raise ValueError(f"Target has {target.s_R.size} buses, system has {system.N}")

    def residual(x: np.ndarray) -> np.ndarray:
        p, q = eval_power(system, VoltageState.from_vector(x))
        return np.concatenate([p - target.s_R, q - target.s_I])

    def jacobian(x: np.ndarray) -> np.ndarray:
        return eval_power_jacobian(system, VoltageState.from_vector(x))

    return ResidualModel(
        n=2 * system.N,
        m=2 * system.N,
        residual=residual,
        jacobian=jacobian,
        name=name or system.name,
    )
