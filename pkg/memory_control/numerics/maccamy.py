"""MacCamy transform: first-order memory equation to a second-order memory wave equation.

The first-order problem is integrated in the form

    w'(t) = w1 + 2 alpha (w - w0) + int_0^t G(t - s) Delta w(s) ds,   G = 1 + N - N(0),

whose derivative is w'' = 2 alpha w' + Delta w + (N' * Delta w) + F. Inverting
(I + N'*) with the resolvent R of N' and integrating by parts twice gives

    w'' = a w' + Delta w + b_pre w + K_pre * w + F1,

    a      = 2 alpha + R(0)
    b_pre  = R'(0) - 2 alpha R(0)
    K_pre  = R'' - 2 alpha R'
    F1     = F - R * F - R(t) w1 - (R'(t) - 2 alpha R(t)) w0

and the substitution w = exp(a t / 2) v removes the velocity term:
v'' = Delta v + b v + K * v + exp(-a t / 2) F1 with b = b_pre + a^2 / 4 and
K = exp(-a t / 2) K_pre. R' and R'' come from the differentiated resolvent
identities, using exact derivatives of N.

Test Coverage: tests/test_maccamy.py
- Resolvent of N' for N = t, 0, t^2/2
- Constants for N = 0, N = 1, N = exp(-t)
- Equivalence of the direct first-order solve with the transformed solve
- Scaling consistency, affine-map linearity, record round trip
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple, Union

import numpy as np

from memory_control.core.exceptions import KernelError, TransformError
from memory_control.numerics.convolution import TRAPEZOID, QuadratureRule, convolve, resolvent_defect, resolvent_kernel
from memory_control.numerics.field import SystemParams
from memory_control.numerics.kernels import ClosedForm, SampledKernel, TimeGrid
from memory_control.numerics.modal import ModalSystem, ModalTrajectory, solve_mode_timestep
from memory_control.numerics.spectral import SpectralDomain, SpectralVector


logger = logging.getLogger(__name__)


Coefficients = Union[SpectralVector, np.ndarray, None]


@dataclass(frozen=True)
class FirstOrderProblem:
    """Memory equation data: alpha and a closed-form kernel N on the working grid."""

    alpha: float
    memory: SampledKernel
    rule: QuadratureRule = field(default=TRAPEZOID, compare=False)
    tolerance: float = 1e-8

    @property
    def grid(self) -> TimeGrid:
        return self.memory.grid

    @property
    def horizon(self) -> float:
        return self.grid.t_end

    def relaxation_kernel(self) -> SampledKernel:
        """G = 1 + N - N(0), the kernel acting on Delta w in the integrated equation."""
        values = 1.0 + self.memory.values - self.memory.values[0]
        return SampledKernel(self.grid, values, label=f"G[{self.memory.label}]")

    def on_grid(self, grid: TimeGrid) -> "FirstOrderProblem":
        return FirstOrderProblem(self.alpha, self.memory.resampled(grid), self.rule, self.tolerance)


@dataclass(frozen=True)
class MemoryResolvent:
    derivative: SampledKernel
    resolvent: SampledKernel
    defect: float


def differentiate_memory_equation(problem: FirstOrderProblem) -> MemoryResolvent:
    """M = N' and its resolvent M~ (M~ = M - M * M~)."""
    try:
        derivative = problem.memory.derivative(1)
    except KernelError as e:
        raise TransformError(f"Memory kernel '{problem.memory.label}' has no closed-form derivatives") from e

    resolvent = resolvent_kernel(derivative, problem.rule, problem.tolerance)
    defect = resolvent_defect(derivative, resolvent, problem.rule)
    return MemoryResolvent(derivative=derivative, resolvent=resolvent, defect=defect)


def _modal_array(values: Coefficients, n_modes: Optional[int] = None) -> np.ndarray:
    if values is None:
        return np.zeros(n_modes or 0)
    array = values.coefficients if isinstance(values, SpectralVector) else np.asarray(values, dtype=float)
    if n_modes is not None:
        out = np.zeros(n_modes)
        n = min(n_modes, array.size)
        out[:n] = array[:n]
        return out
    return np.asarray(array, dtype=float)


@dataclass(frozen=True, eq=False)
class SecondOrderSystem:
    """Constants and kernels of the transformed equation, with the maps that carry data across."""

    alpha: float
    a: float
    b: float
    b_pre: float
    kernel: SampledKernel
    kernel_pre: SampledKernel
    resolvent: SampledKernel
    resolvent_prime: SampledKernel
    rule: QuadratureRule = TRAPEZOID
    problem: Optional[FirstOrderProblem] = None

    @property
    def grid(self) -> TimeGrid:
        return self.kernel.grid

    @property
    def scale_rate(self) -> float:
        return 0.5 * self.a

    @property
    def params(self) -> SystemParams:
        """Post-scaling coefficients (no velocity term)."""
        return SystemParams(b=self.b, kernel=self.kernel, rule=self.rule)

    @property
    def pre_scaling_params(self) -> SystemParams:
        return SystemParams(b=self.b_pre, kernel=self.kernel_pre, velocity=self.a, rule=self.rule)

    def scaling(self, sign: float = 1.0) -> np.ndarray:
        return np.exp(sign * self.scale_rate * self.grid.nodes)

    def affine_map(self, w0: Coefficients, w1: Coefficients, forcing: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Pre-scaling modal forcing F1, shape (n_modes, grid.size).

        The map is linear in (w0, w1, F); ``forcing`` holds modal samples of F.
        """
        c0 = _modal_array(w0)
        c1 = _modal_array(w1, c0.size)
        R = self.resolvent.values
        drift_w0 = self.resolvent_prime.values - 2.0 * self.alpha * R

        out = -np.outer(c1, R) - np.outer(c0, drift_w0)
        if forcing is not None:
            forcing = np.atleast_2d(np.asarray(forcing, dtype=float))
            memory = np.array([self.rule.convolve_arrays(R, row, self.grid.dt) for row in forcing])
            out = out + forcing - memory
        return out

    def scaled_forcing(self, w0: Coefficients, w1: Coefficients, forcing: Optional[np.ndarray] = None) -> np.ndarray:
        """exp(-a t / 2) F1, the forcing of the post-scaling equation."""
        return self.affine_map(w0, w1, forcing) * self.scaling(-1.0)[None, :]

    def initial_data(self, w0: Coefficients, w1: Coefficients) -> Tuple[np.ndarray, np.ndarray]:
        """Post-scaling data v(0) = w0, v'(0) = w1 - (a/2) w0."""
        c0 = _modal_array(w0)
        c1 = _modal_array(w1, c0.size)
        return c0.copy(), c1 - self.scale_rate * c0

    def unscale(self, values: np.ndarray) -> np.ndarray:
        """w = exp(a t / 2) v along the last axis."""
        return np.asarray(values) * self.scaling(1.0)

    def on_grid(self, grid: TimeGrid) -> "SecondOrderSystem":
        if grid == self.grid:
            return self
        if self.problem is None:
            raise TransformError("System was loaded from a record; re-derive it from its first-order problem")
        return maccamy_transform(self.problem.on_grid(grid))

    def forcing_model(self, w0: Coefficients, w1: Coefficients) -> Callable[[TimeGrid, int], np.ndarray]:
        """Affine drift forcing as a function of (grid, n_modes), re-derived on each grid."""

        def model(grid: TimeGrid, n_modes: int) -> np.ndarray:
            system = self.on_grid(grid)
            return system.scaled_forcing(_modal_array(w0, n_modes), _modal_array(w1, n_modes))

        return model

    def to_record(self) -> Tuple[Dict[str, float], Dict[str, SampledKernel]]:
        """Scalar constants and named kernels, the on-disk form of the system."""
        constants = {
            "alpha": self.alpha,
            "a": self.a,
            "b": self.b,
            "b_pre": self.b_pre,
            "scale_rate": self.scale_rate,
            "t_end": self.grid.t_end,
            "n_steps": float(self.grid.n_steps),
        }
        kernels = {
            "kernel": self.kernel,
            "kernel_pre": self.kernel_pre,
            "resolvent": self.resolvent,
            "resolvent_prime": self.resolvent_prime,
        }
        return constants, kernels

    @classmethod
    def from_record(
        cls, constants: Dict[str, float], kernels: Dict[str, SampledKernel], rule: QuadratureRule = TRAPEZOID
    ) -> "SecondOrderSystem":
        missing = {"alpha", "a", "b", "b_pre"} - set(constants)
        missing |= {"kernel", "kernel_pre", "resolvent", "resolvent_prime"} - set(kernels)
        if missing:
            raise TransformError(f"Incomplete system record, missing: {sorted(missing)}")
        return cls(
            alpha=float(constants["alpha"]),
            a=float(constants["a"]),
            b=float(constants["b"]),
            b_pre=float(constants["b_pre"]),
            kernel=kernels["kernel"],
            kernel_pre=kernels["kernel_pre"],
            resolvent=kernels["resolvent"],
            resolvent_prime=kernels["resolvent_prime"],
            rule=rule,
        )


def maccamy_transform(problem: FirstOrderProblem) -> SecondOrderSystem:
    """
    Derive the second-order system of a first-order memory problem.

    Args:
        problem: alpha and a closed-form memory kernel N

    Returns:
        SecondOrderSystem with constants, kernels and affine data map

    Raises:
        TransformError: If N has no closed form (derivatives unavailable)
        ResolventError: If the resolvent of N' cannot be computed on the grid
    """
    memory = problem.memory
    if memory.closed_form is None:
        raise TransformError(f"Memory kernel '{memory.label}' has no closed form; MacCamy transform needs N', N'', N'''")

    grid = problem.grid
    rule = problem.rule
    alpha = problem.alpha

    base = differentiate_memory_equation(problem)
    M = base.derivative
    R = base.resolvent
    M1 = memory.derivative(2)
    M2 = memory.derivative(3)

    M0 = M.values[0]
    M1_0 = M1.values[0]
    R1 = M1.values - M0 * R.values - convolve(M1, R, rule).values
    R2 = M2.values - M0 * R1 - M1_0 * R.values - convolve(M2, R, rule).values

    a = 2.0 * alpha + float(R.values[0])
    b_pre = float(R1[0]) - 2.0 * alpha * float(R.values[0])
    kernel_pre_values = R2 - 2.0 * alpha * R1
    c = 0.5 * a
    b = b_pre + c * c
    kernel_values = np.exp(-c * grid.nodes) * kernel_pre_values

    system = SecondOrderSystem(
        alpha=alpha,
        a=a,
        b=b,
        b_pre=b_pre,
        kernel=SampledKernel(grid, kernel_values, label=f"K[{memory.label}]"),
        kernel_pre=SampledKernel(grid, kernel_pre_values, label=f"K_pre[{memory.label}]"),
        resolvent=R,
        resolvent_prime=SampledKernel(grid, R1, label=f"dR[{memory.label}]"),
        rule=rule,
        problem=problem,
    )
    logger.info(f"✓ MacCamy transform of alpha={alpha:g}, N={memory.label}: a={a:.6g}, b={b:.6g}")
    return system


def solve_first_order_mode(
    problem: FirstOrderProblem,
    lam: float,
    w0: float,
    w1: Optional[float] = None,
) -> ModalTrajectory:
    """
    Direct trapezoid-in-time march of w' = w1 + 2 alpha (w - w0) - lambda^2 (G * w).

    ``w1`` defaults to 2 alpha w0, the slope implied by the undifferentiated equation.
    The returned velocity is the right-hand side evaluated on the solution.
    """
    grid = problem.grid
    h = grid.dt
    rule = problem.rule
    alpha = problem.alpha
    G = problem.relaxation_kernel().values
    slope = 2.0 * alpha * w0 if w1 is None else w1
    lam_sq = lam * lam

    w = np.zeros(grid.size)
    rhs = np.zeros(grid.size)
    w[0] = w0
    rhs[0] = slope
    for j in range(1, grid.size):
        const = slope - 2.0 * alpha * w0 - lam_sq * h * rule.history_sum(G, w, j)
        coeff = 2.0 * alpha - lam_sq * h * rule.diagonal_weight(j) * G[0]
        w[j] = (w[j - 1] + 0.5 * h * (rhs[j - 1] + const)) / (1.0 - 0.5 * h * coeff)
        rhs[j] = const + coeff * w[j]
    return ModalTrajectory(grid, w, rhs, method="direct")


def _transformed_modes(
    system: SecondOrderSystem,
    domain: SpectralDomain,
    w0: np.ndarray,
    w1: np.ndarray,
    pre_scaling: bool,
) -> np.ndarray:
    params = system.pre_scaling_params if pre_scaling else system.params
    if pre_scaling:
        v0, v1 = w0, w1
        forcing = system.affine_map(w0, w1)
    else:
        v0, v1 = system.initial_data(w0, w1)
        forcing = system.scaled_forcing(w0, w1)

    rows = []
    for index, lam in enumerate(domain.eigenvalues[: w0.size]):
        g = SampledKernel(system.grid, forcing[index])
        trajectory = solve_mode_timestep(params.system(lam), v0[index], v1[index], g)
        rows.append(trajectory.psi if pre_scaling else system.unscale(trajectory.psi))
    return np.array(rows)


def equivalence_check(
    problem: FirstOrderProblem,
    system: SecondOrderSystem,
    domain: SpectralDomain,
    w0: Coefficients,
    n_modes: int,
    grid: Optional[TimeGrid] = None,
    w1: Coefficients = None,
) -> float:
    """Max deviation over modes and nodes between the direct and the transformed solves."""
    if grid is not None and grid != problem.grid:
        problem = problem.on_grid(grid)
        system = maccamy_transform(problem)

    c0 = _modal_array(w0, n_modes)
    c1 = 2.0 * problem.alpha * c0 if w1 is None else _modal_array(w1, n_modes)

    transformed = _transformed_modes(system, domain, c0, c1, pre_scaling=False)
    deviation = 0.0
    for index, lam in enumerate(domain.eigenvalues[:n_modes]):
        direct = solve_first_order_mode(problem, float(lam), c0[index], c1[index])
        deviation = max(deviation, float(np.max(np.abs(direct.psi - transformed[index]))))

    logger.info(f"Equivalence on {problem.grid}: max deviation {deviation:.3e}")
    return deviation


def scaling_consistency(
    problem: FirstOrderProblem,
    system: SecondOrderSystem,
    domain: SpectralDomain,
    w0: Coefficients,
    n_modes: int,
    w1: Coefficients = None,
) -> float:
    """Max deviation between the pre-scaling solve and the unscaled post-scaling solve."""
    c0 = _modal_array(w0, n_modes)
    c1 = 2.0 * problem.alpha * c0 if w1 is None else _modal_array(w1, n_modes)
    pre = _transformed_modes(system, domain, c0, c1, pre_scaling=True)
    post = _transformed_modes(system, domain, c0, c1, pre_scaling=False)
    return float(np.max(np.abs(pre - post)))


def kernel_from_closed_form(name: str, params: Dict[str, object], grid: TimeGrid) -> SampledKernel:
    """Sampled memory kernel declared by family name and parameters."""
    return SampledKernel.from_closed_form(ClosedForm(name, dict(params)), grid)
