"""Scalar memory oscillator per eigenmode.

Each mode obeys psi'' = a psi' + (b - lambda^2) psi + (K*psi) + g. Two independent
solvers are provided: an explicit central-difference march with lagged memory
sums, and the Volterra representation through the modal resolvent L_n.

Test Coverage: tests/test_modal.py
- Harmonic and shifted-frequency closed forms, energy conservation
- Cross-method agreement with memory, CFL rejection
- Modal convolution kernel closed forms, L_n bound and first-order residual
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from memory_control.core.exceptions import StabilityError
from memory_control.numerics.convolution import (
    TRAPEZOID,
    QuadratureRule,
    convolve,
    resolvent_defect,
    resolvent_kernel,
    trig_factor,
)
from memory_control.numerics.kernels import SampledKernel, TimeGrid


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModalSystem:
    """One mode: frequency lambda, zeroth-order shift b, memory kernel K and velocity coefficient a."""

    lam: float
    b: float
    kernel: SampledKernel
    velocity: float = 0.0
    rule: QuadratureRule = field(default=TRAPEZOID, compare=False)

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError(f"Mode frequency must be positive, got {self.lam}")

    @property
    def grid(self) -> TimeGrid:
        return self.kernel.grid

    def check_stability(self) -> None:
        if self.grid.dt * self.lam >= 2.0:
            raise StabilityError(self.grid.dt, self.lam)


@dataclass(frozen=True, eq=False)
class ModalTrajectory:
    """Samples of psi and psi' on a grid."""

    grid: TimeGrid
    psi: np.ndarray
    psi_prime: np.ndarray
    method: str = "timestep"

    def __post_init__(self) -> None:
        for name in ("psi", "psi_prime"):
            values = np.array(getattr(self, name), copy=True)
            if values.shape != (self.grid.size,):
                raise ValueError(f"Trajectory '{name}' has shape {values.shape}, expected ({self.grid.size},)")
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    def to_columns(self) -> Tuple[List[str], np.ndarray]:
        return ["t", "psi", "psi_prime"], np.column_stack([self.grid.nodes, self.psi, self.psi_prime])

    def sup_distance(self, other: "ModalTrajectory") -> float:
        self.grid.require_same(other.grid, "trajectory comparison")
        return float(np.max(np.abs(self.psi - other.psi)))


@dataclass(frozen=True)
class ModalResolvent:
    kernel: SampledKernel
    bound: float
    defect: float
    first_order_residual: float


def march_mode(
    system: ModalSystem,
    psi0: complex,
    psi1: complex,
    forcing: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Displacement samples of the central-difference scheme (no stability check)."""
    grid = system.grid
    h = grid.dt
    n = grid.size
    coef = system.b - system.lam**2
    a = system.velocity
    kernel = system.kernel.values
    has_memory = not system.kernel.is_zero
    rule = system.rule

    dtype = np.result_type(kernel, np.asarray(psi0), np.asarray(psi1), forcing if forcing is not None else 0.0)
    g = np.zeros(n, dtype=dtype) if forcing is None else np.asarray(forcing, dtype=dtype)
    psi = np.zeros(n, dtype=dtype)

    psi[0] = psi0
    psi[1] = psi0 + h * psi1 + 0.5 * h * h * (coef * psi0 + a * psi1 + g[0])

    lead = 1.0 - 0.5 * a * h
    trail = 1.0 + 0.5 * a * h
    for j in range(1, n - 1):
        accel = coef * psi[j] + g[j]
        if has_memory:
            accel += h * rule.history_sum(kernel, psi, j)
        psi[j + 1] = (2.0 * psi[j] - trail * psi[j - 1] + h * h * accel) / lead
    return psi


def differentiate_samples(psi: np.ndarray, psi1: complex, h: float) -> np.ndarray:
    """Central differences inside, exact initial slope, one-sided second order at the end."""
    velocity = np.empty_like(psi)
    velocity[0] = psi1
    velocity[1:-1] = (psi[2:] - psi[:-2]) / (2.0 * h)
    velocity[-1] = (3.0 * psi[-1] - 4.0 * psi[-2] + psi[-3]) / (2.0 * h)
    return velocity


def solve_mode_timestep(
    system: ModalSystem,
    psi0: float = 0.0,
    psi1: float = 1.0,
    g: Optional[SampledKernel] = None,
) -> ModalTrajectory:
    """
    Explicit second-order march of one mode.

    Args:
        system: Mode definition
        psi0: Initial displacement
        psi1: Initial velocity
        g: Optional forcing on the system grid

    Returns:
        ModalTrajectory with method 'timestep'

    Raises:
        StabilityError: If dt * lambda >= 2
        GridMismatchError: If the forcing lives on another grid
    """
    system.check_stability()
    forcing = None
    if g is not None:
        system.grid.require_same(g.grid, "modal forcing")
        forcing = g.values

    psi = march_mode(system, psi0, psi1, forcing)
    velocity = differentiate_samples(psi, psi1, system.grid.dt)
    return ModalTrajectory(system.grid, psi, velocity, method="timestep")


def modal_convolution_kernel(system: ModalSystem) -> SampledKernel:
    """(1/lambda) [b sin(lambda t) + (K * sin(lambda .))(t)]."""
    sine = trig_factor("S", system.lam, system.grid)
    values = system.b * sine.values
    if not system.kernel.is_zero:
        values = values + convolve(system.kernel, sine, system.rule).values
    return SampledKernel(system.grid, values / system.lam, label=f"kappa[lam={system.lam:g}]")


def resolvent_Ln(system: ModalSystem, tolerance: float = 1e-8) -> ModalResolvent:
    """Modal resolvent L_n = -kappa + kappa * L_n with its empirical bound sup lambda |L_n|."""
    kappa = modal_convolution_kernel(system)
    negated = -kappa
    L = resolvent_kernel(negated, system.rule, tolerance)

    result = ModalResolvent(
        kernel=L,
        bound=system.lam * L.sup_norm(),
        defect=resolvent_defect(negated, L, system.rule),
        first_order_residual=float(np.max(np.abs(L.values + kappa.values))),
    )
    logger.debug(f"L_n at lambda={system.lam:g}: bound {result.bound:.4g}, defect {result.defect:.2e}")
    return result


def solve_mode_volterra(system: ModalSystem, tolerance: float = 1e-8) -> ModalTrajectory:
    """psi = S/lambda - (L_n*S)/lambda and psi' = C - L_n*C, for data (0, 1)."""
    if system.velocity != 0.0:
        raise ValueError("Volterra representation requires a zero velocity coefficient")

    sine = trig_factor("S", system.lam, system.grid)
    cosine = trig_factor("C", system.lam, system.grid)
    L = resolvent_Ln(system, tolerance).kernel

    if L.is_zero:
        psi = sine.values / system.lam
        velocity = cosine.values.copy()
    else:
        psi = (sine.values - convolve(L, sine, system.rule).values) / system.lam
        velocity = cosine.values - convolve(L, cosine, system.rule).values
    return ModalTrajectory(system.grid, psi, velocity, method="volterra")


def energy_drift(trajectory: ModalTrajectory, lam: float) -> float:
    """max_t |lambda^2 psi^2 + psi'^2 - E(0)|."""
    energy = lam**2 * trajectory.psi**2 + trajectory.psi_prime**2
    return float(np.max(np.abs(energy - energy[0])))
