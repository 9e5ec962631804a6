"""Boundary control synthesis and controllability diagnostics.

Test Coverage: tests/test_control.py
- Input map: zero columns, Duhamel column oracle, superposition, whitening
- Minimum-norm synthesis: zero target, orthogonal rows, rank rejection, optimality
- Regularization sweep and L-curve corner
- Steering: fixed point, memoryless oracle (slow), bookkeeping consistency
- Moment Gram, perp probe, deflation and the second-derivative identity
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
import scipy.linalg

from memory_control.core.exceptions import ControllabilityError
from memory_control.numerics.field import (
    FieldSolution,
    SystemParams,
    adjoint_evolution,
    controlled_evolution,
    free_evolution,
)
from memory_control.numerics.kernels import SampledKernel, TimeGrid
from memory_control.numerics.modal import march_mode
from memory_control.numerics.signals import ControlBasis, ControlSignal
from memory_control.numerics.spectral import SpectralDomain, SpectralVector
from memory_control.utils.parallel import parallel_map


logger = logging.getLogger(__name__)


ForcingModel = Callable[[TimeGrid, int], np.ndarray]

DEFAULT_EPSILON_SWEEP = np.logspace(-12, -4, 9)


# --------------------------------------------------------------------------
# Control-to-state map
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InputMap:
    """
    Discrete map from control coefficients to terminal modal states.

    ``matrix`` acts on coefficients flattened node-major (node * n_functions + i).
    ``whitened`` = matrix @ inv(R) where R^T R is the control mass matrix, so the
    Euclidean norm of whitened coordinates is the discrete L2 norm of the control.
    """

    domain: SpectralDomain
    basis: ControlBasis
    grid: TimeGrid
    n_modes: int
    velocity_rows: bool
    matrix: np.ndarray
    whitened: np.ndarray
    mass_factor: np.ndarray
    diagonal_mass: bool

    @property
    def n_functions(self) -> int:
        return self.basis.n_functions(self.grid)

    def unwhiten(self, z: np.ndarray) -> np.ndarray:
        """Coefficients (n_gamma, n_functions) from whitened coordinates."""
        if self.diagonal_mass:
            c = z / self.mass_factor
        else:
            c = scipy.linalg.solve_triangular(self.mass_factor, z, lower=False)
        return c.reshape(self.domain.n_gamma, self.n_functions)

    def control(self, z: np.ndarray) -> ControlSignal:
        return ControlSignal.from_coefficients(
            self.grid, self.basis, self.domain.gamma_nodes, self.domain.gamma_weights, self.unwhiten(z)
        )


def _impulse_rows(params: SystemParams, lam: float) -> np.ndarray:
    """
    Rows mapping forcing samples g_s to w(t_k) for the last three k.

    Uses two impulse responses: forcing at step 1 (shifted for every s >= 1)
    and forcing at step 0, which enters through the first Taylor step.
    """
    grid = params.grid
    size = grid.size
    system = params.system(lam)

    pulse = np.zeros(size)
    pulse[1] = 1.0
    interior = march_mode(system, 0.0, 0.0, pulse)
    pulse[:] = 0.0
    pulse[0] = 1.0
    start = march_mode(system, 0.0, 0.0, pulse)

    rows = np.zeros((3, size))
    for offset in range(3):
        k = grid.n_steps - offset
        rows[offset, 1 : k + 1] = interior[k:0:-1]
        rows[offset, 0] = start[k]
    return rows


def input_map(
    domain: SpectralDomain,
    params: SystemParams,
    basis: Optional[ControlBasis] = None,
    n_modes: Optional[int] = None,
    velocity_rows: bool = False,
    threads: int = 1,
) -> InputMap:
    """
    Assemble the exact discrete control-to-terminal-state map.

    Args:
        domain: Spectral domain (its Gamma nodes carry the control)
        params: System coefficients on the control grid (trapezoid memory rule)
        basis: Control time basis (default: one hat per grid node)
        n_modes: Number of controlled modes
        velocity_rows: Also constrain the terminal velocity
        threads: Worker threads for the mode sweep

    Returns:
        InputMap with raw and whitened matrices

    Raises:
        StabilityError: If dt * lambda_max >= 2
    """
    basis = basis or ControlBasis()
    grid = params.grid
    n = n_modes or domain.n_modes
    h = grid.dt
    for lam in domain.eigenvalues[:n]:
        params.system(lam).check_stability()

    rows = parallel_map(lambda lam: _impulse_rows(params, float(lam)), domain.eigenvalues[:n], threads)
    state = np.array([r[0] for r in rows])
    P = None if basis.is_grid_hats else basis.matrix(grid)
    state_in_basis = state if P is None else state @ P

    blocks = [state_in_basis]
    if velocity_rows:
        velocity = np.array([(3.0 * r[0] - 4.0 * r[1] + r[2]) / (2.0 * h) for r in rows])
        blocks.append(velocity if P is None else velocity @ P)

    traces = domain.traces[:n]
    columns = []
    for node in range(domain.n_gamma):
        factor = -domain.gamma_weights[node] * traces[:, node]
        columns.append(np.vstack([factor[:, None] * block for block in blocks]))
    matrix = np.hstack(columns)

    tau = grid.trapezoid_weights
    if P is None:
        factor = np.concatenate([np.sqrt(w * tau) for w in domain.gamma_weights])
        whitened = matrix / factor[None, :]
        diagonal = True
    else:
        time_mass = P.T @ (tau[:, None] * P)
        mass = scipy.linalg.block_diag(*[w * time_mass for w in domain.gamma_weights])
        factor = scipy.linalg.cholesky(mass, lower=False)
        whitened = scipy.linalg.solve_triangular(factor, matrix.T, trans="T", lower=False).T
        diagonal = False

    logger.debug(f"Input map: {matrix.shape[0]} rows x {matrix.shape[1]} columns ({basis.describe()})")
    return InputMap(
        domain=domain.truncate(n),
        basis=basis,
        grid=grid,
        n_modes=n,
        velocity_rows=velocity_rows,
        matrix=matrix,
        whitened=whitened,
        mass_factor=factor,
        diagonal_mass=diagonal,
    )


# --------------------------------------------------------------------------
# Minimum-norm synthesis
# --------------------------------------------------------------------------


@dataclass
class MinNormSolution:
    coefficients: np.ndarray
    residual: np.ndarray
    singular_values: np.ndarray
    epsilon: float

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.residual))

    @property
    def coefficient_norm(self) -> float:
        return float(np.linalg.norm(self.coefficients))

    @property
    def sigma_min(self) -> float:
        return float(self.singular_values.min())

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values.max())

    @property
    def condition_number(self) -> float:
        return self.sigma_max / self.sigma_min if self.sigma_min > 0 else float("inf")


def min_norm_control(
    G: np.ndarray,
    target: np.ndarray,
    epsilon: float = 0.0,
    rcond: float = 1e-8,
) -> MinNormSolution:
    """
    Minimize ||G c - target||^2 + epsilon ||c||^2 through the SVD of G.

    Args:
        G: Input map (rows = constrained quantities)
        target: Right-hand side
        epsilon: Tikhonov parameter (>= 0)
        rcond: Relative singular-value threshold when epsilon = 0

    Returns:
        MinNormSolution with coefficients, residual and spectrum

    Raises:
        ControllabilityError: If epsilon = 0 and sigma_min < rcond * sigma_max
    """
    if epsilon < 0:
        raise ValueError(f"Regularization must be non-negative, got {epsilon}")
    G = np.asarray(G, dtype=float)
    target = np.asarray(target, dtype=float)
    if target.shape != (G.shape[0],):
        raise ValueError(f"Target length {target.shape} does not match {G.shape[0]} rows")

    U, s, Vt = scipy.linalg.svd(G, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise ControllabilityError(0.0, 0.0, rcond)
    if epsilon == 0.0 and s[-1] < rcond * s[0]:
        raise ControllabilityError(float(s[-1]), float(s[0]), rcond)

    filtered = s / (s * s + epsilon)
    coefficients = Vt.T @ (filtered * (U.T @ target))
    return MinNormSolution(
        coefficients=coefficients,
        residual=G @ coefficients - target,
        singular_values=s,
        epsilon=float(epsilon),
    )


@dataclass
class LCurve:
    epsilons: np.ndarray
    residual_norms: np.ndarray
    solution_norms: np.ndarray
    corner_index: int

    @property
    def corner_epsilon(self) -> float:
        return float(self.epsilons[self.corner_index])

    def to_columns(self):
        return ["epsilon", "residual", "norm"], np.column_stack([self.epsilons, self.residual_norms, self.solution_norms])


def regularization_sweep(G: np.ndarray, target: np.ndarray, eps_values: Optional[Sequence[float]] = None) -> LCurve:
    """Tikhonov sweep with the L-curve corner at maximum discrete curvature (log-log)."""
    eps = np.asarray(DEFAULT_EPSILON_SWEEP if eps_values is None else eps_values, dtype=float)
    if eps.size < 1 or np.any(eps <= 0):
        raise ValueError("Regularization sweep needs positive epsilon values")

    U, s, Vt = scipy.linalg.svd(np.asarray(G, dtype=float), full_matrices=False)
    projected = U.T @ target
    outside = float(np.linalg.norm(target - U @ projected))

    residuals, norms = [], []
    for value in eps:
        filtered = s / (s * s + value)
        z = filtered * projected
        inside = (s * filtered - 1.0) * projected
        residuals.append(float(np.hypot(np.linalg.norm(inside), outside)))
        norms.append(float(np.linalg.norm(z)))
    residuals_arr = np.array(residuals)
    norms_arr = np.array(norms)

    if eps.size < 3:
        corner = int(np.argmin(residuals_arr * norms_arr))
    else:
        tiny = np.finfo(float).tiny
        x = np.log(np.maximum(residuals_arr, tiny))
        y = np.log(np.maximum(norms_arr, tiny))
        dx, dy = np.gradient(x), np.gradient(y)
        ddx, ddy = np.gradient(dx), np.gradient(dy)
        denominator = np.power(dx * dx + dy * dy, 1.5)
        with np.errstate(divide="ignore", invalid="ignore"):
            curvature = np.where(denominator > 0, np.abs(dx * ddy - dy * ddx) / denominator, 0.0)
        corner = int(np.argmax(np.nan_to_num(curvature)))

    logger.info(f"L-curve corner at epsilon={eps[corner]:.1e}")
    return LCurve(epsilons=eps, residual_norms=residuals_arr, solution_norms=norms_arr, corner_index=corner)


# --------------------------------------------------------------------------
# Steering
# --------------------------------------------------------------------------


@dataclass
class SteeringReport:
    """Synthesized control with in-sample and independent verification residuals."""

    control: ControlSignal
    target: SpectralVector
    drift: SpectralVector
    achieved: SpectralVector
    residual_l2: float
    residual_hm1: float
    relative_residual: float
    verification_residual: float
    verification_modes: int
    sigma_min: float
    sigma_max: float
    epsilon: float
    leakage: bool
    lcurve: Optional[LCurve] = None
    notes: List[str] = field(default_factory=list)

    @property
    def n_modes(self) -> int:
        return self.target.n_modes

    @property
    def condition_number(self) -> float:
        return self.sigma_max / self.sigma_min if self.sigma_min > 0 else float("inf")

    @property
    def residual_per_mode(self) -> np.ndarray:
        return self.achieved.coefficients - self.target.coefficients

    def to_dict(self) -> dict:
        return {
            "n_modes": self.n_modes,
            "residual_l2": self.residual_l2,
            "residual_hm1": self.residual_hm1,
            "relative_residual": self.relative_residual,
            "verification_residual": self.verification_residual,
            "verification_modes": self.verification_modes,
            "sigma_min": self.sigma_min,
            "sigma_max": self.sigma_max,
            "condition_number": self.condition_number,
            "epsilon": self.epsilon,
            "control_norm": self.control.l2_norm(),
            "leakage": self.leakage,
            "lcurve_corner": None if self.lcurve is None else self.lcurve.corner_epsilon,
        }

    def __str__(self) -> str:
        flag = "✗ truncation leakage" if self.leakage else "✓ verified"
        return (
            f"{flag}: residual {self.relative_residual:.3e} in-sample, "
            f"{self.verification_residual:.3e} on {self.verification_modes} modes at dt/2 "
            f"(sigma_min={self.sigma_min:.3e}, epsilon={self.epsilon:.1e})"
        )


def _relative(residual: float, reference: float) -> float:
    return residual / reference if reference > 0 else residual


def steer(
    domain: SpectralDomain,
    params: SystemParams,
    w0: SpectralVector,
    target: SpectralVector,
    n_modes: int,
    basis: Optional[ControlBasis] = None,
    w1: Optional[SpectralVector] = None,
    epsilon: Optional[float] = None,
    rcond: float = 1e-8,
    velocity_rows: bool = False,
    target_velocity: Optional[SpectralVector] = None,
    forcing_model: Optional[ForcingModel] = None,
    fine_params: Optional[SystemParams] = None,
    eps_values: Optional[Sequence[float]] = None,
    threads: int = 1,
) -> SteeringReport:
    """
    Steer w0 to ``target`` on the first ``n_modes`` modes.

    The drift from w0 is removed from the target, the minimum-norm control of the
    whitened input map is synthesized (epsilon = 0 first, L-curve sweep on rejection
    when ``epsilon`` is None), and the result is checked by an independent forward
    solve at dt/2 on twice the modes.

    Args:
        domain: Spectral domain
        params: System coefficients on the control grid
        w0: Initial displacement
        target: Terminal displacement (coefficients beyond n_modes count in the verification)
        n_modes: Number of steered modes
        basis: Control time basis
        w1: Initial velocity
        epsilon: Fixed regularization (None: automatic policy)
        rcond: Rank threshold for epsilon = 0
        velocity_rows: Also steer the terminal velocity to ``target_velocity`` (default 0)
        target_velocity: Terminal velocity target
        forcing_model: Modal forcing as a function of (grid, n_modes)
        fine_params: Coefficients on the refined grid (default: params.on_grid)
        eps_values: Epsilon values of the automatic sweep
        threads: Worker threads

    Returns:
        SteeringReport

    Raises:
        ControllabilityError: If a fixed epsilon = 0 meets a rank-deficient map
    """
    grid = params.grid
    notes: List[str] = []
    domain_n = domain.with_modes(max(n_modes, domain.n_modes))

    forcing = None if forcing_model is None else forcing_model(grid, n_modes)
    drift = free_evolution(domain_n, params, w0, w1, forcing, n_modes, threads)
    wanted = target.padded(domain_n).truncated(n_modes)
    rhs = wanted.coefficients - drift.displacement[:, -1]
    if velocity_rows:
        velocity_target = np.zeros(n_modes)
        if target_velocity is not None:
            velocity_target = target_velocity.padded(domain_n).coefficients[:n_modes]
        rhs = np.concatenate([rhs, velocity_target - drift.velocity[:, -1]])

    imap = input_map(domain_n, params, basis, n_modes, velocity_rows, threads)
    lcurve = None
    if epsilon is None:
        try:
            solution = min_norm_control(imap.whitened, rhs, 0.0, rcond)
        except ControllabilityError as e:
            logger.warning(f"{e} Sweeping epsilon")
            lcurve = regularization_sweep(imap.whitened, rhs, eps_values)
            solution = min_norm_control(imap.whitened, rhs, lcurve.corner_epsilon, rcond)
            notes.append(f"epsilon = 0 rejected (sigma_min/sigma_max < {rcond:.0e}); L-curve corner used")
    else:
        solution = min_norm_control(imap.whitened, rhs, epsilon, rcond)

    control = imap.control(solution.coefficients)
    response = controlled_evolution(domain_n, params, control, n_modes, threads)
    achieved = drift.terminal_state + response.terminal_state
    residual = achieved - wanted
    residual_l2 = residual.norm(0)

    fine_grid = grid.refined(2)
    fine_modes = 2 * n_modes
    fine_domain = domain.with_modes(fine_modes)
    fine = fine_params or params.on_grid(fine_grid)
    fine_forcing = None if forcing_model is None else forcing_model(fine_grid, fine_modes)
    fine_drift = free_evolution(fine_domain, fine, w0, w1, fine_forcing, fine_modes, threads)
    fine_response = controlled_evolution(fine_domain, fine, control.resampled(fine_grid), fine_modes, threads)
    fine_target = target.padded(fine_domain)
    fine_state = fine_drift.terminal_state + fine_response.terminal_state
    verification = _relative((fine_state - fine_target).norm(0), fine_target.norm(0))

    in_sample = _relative(residual_l2, wanted.norm(0))
    leakage = verification > 10.0 * max(in_sample, 1e-6)
    if leakage:
        notes.append("verification residual exceeds 10x the in-sample residual (truncation leakage)")

    report = SteeringReport(
        control=control,
        target=wanted,
        drift=drift.terminal_state,
        achieved=achieved,
        residual_l2=residual_l2,
        residual_hm1=residual.norm(-1),
        relative_residual=in_sample,
        verification_residual=verification,
        verification_modes=fine_modes,
        sigma_min=solution.sigma_min,
        sigma_max=solution.sigma_max,
        epsilon=solution.epsilon,
        leakage=leakage,
        lcurve=lcurve,
        notes=notes,
    )
    logger.info(str(report))
    return report


# --------------------------------------------------------------------------
# Diagnostics
# --------------------------------------------------------------------------


@dataclass
class MomentGram:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    frequencies: np.ndarray
    family: str

    @property
    def lower(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def upper(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def asymmetry(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def _exp_integral(delta: np.ndarray, T: float) -> np.ndarray:
    """int_0^T exp(i delta t) dt elementwise."""
    out = np.full(delta.shape, T, dtype=complex)
    nonzero = delta != 0.0
    out[nonzero] = (np.exp(1j * delta[nonzero] * T) - 1.0) / (1j * delta[nonzero])
    return out


def _cos_integral(delta: np.ndarray, T: float) -> np.ndarray:
    """int_0^T cos(delta t) dt elementwise."""
    out = np.full(delta.shape, T, dtype=float)
    nonzero = delta != 0.0
    out[nonzero] = np.sin(delta[nonzero] * T) / delta[nonzero]
    return out


def moment_gram(domain: SpectralDomain, T: float, n_modes: Optional[int] = None, family: str = "exponential") -> MomentGram:
    """
    Gram matrix of the moment family over L2(0, T; L2(Gamma)).

    family='exponential' uses Psi_n exp(i mu t) with mu = +lambda_n and -lambda_n;
    family='sine' uses Psi_n sin(lambda_n t). Time integrals are closed form.
    """
    if T <= 0:
        raise ValueError(f"Horizon must be positive, got {T}")
    n = n_modes or domain.n_modes
    psi = domain.normalized_traces[:n]
    lam = domain.eigenvalues[:n]

    if family == "exponential":
        frequencies = np.concatenate([lam, -lam])
        shapes = np.vstack([psi, psi])
        spatial = shapes @ (domain.gamma_weights[:, None] * shapes.T)
        matrix = spatial * _exp_integral(frequencies[:, None] - frequencies[None, :], T)
    elif family == "sine":
        frequencies = lam.copy()
        spatial = psi @ (domain.gamma_weights[:, None] * psi.T)
        time = 0.5 * (
            _cos_integral(lam[:, None] - lam[None, :], T) - _cos_integral(lam[:, None] + lam[None, :], T)
        )
        matrix = (spatial * time).astype(complex)
    else:
        raise ValueError(f"Unknown moment family '{family}' (use exponential or sine)")

    hermitian = 0.5 * (matrix + matrix.conj().T)
    eigenvalues = scipy.linalg.eigh(hermitian, eigvals_only=True)
    return MomentGram(matrix=matrix, eigenvalues=eigenvalues, frequencies=frequencies, family=family)


@dataclass
class PerpProbe:
    singular_values: np.ndarray
    minimal_vector: np.ndarray

    @property
    def sigma_min(self) -> float:
        return float(self.singular_values[-1])

    @property
    def sigma_max(self) -> float:
        return float(self.singular_values[0])

    def decay_profile(self) -> np.ndarray:
        return np.abs(self.minimal_vector)


def perp_probe(domain: SpectralDomain, params: SystemParams, n_modes: Optional[int] = None, threads: int = 1) -> PerpProbe:
    """Singular values of xi0 -> gamma_1 psi on Gamma x (0, T), with psi the adjoint solution."""
    n = n_modes or domain.n_modes
    domain = domain.with_modes(max(n, domain.n_modes))
    unit = adjoint_evolution(domain, params, domain.vector(np.ones(n)), n, threads)

    weights = np.sqrt(domain.gamma_weights[:, None] * params.grid.trapezoid_weights[None, :])
    columns = [(weights * np.outer(domain.traces[index], unit.displacement[index])).ravel() for index in range(n)]
    matrix = np.column_stack(columns)

    _, s, Vt = scipy.linalg.svd(matrix, full_matrices=False)
    probe = PerpProbe(singular_values=s, minimal_vector=Vt[-1])
    profile = ", ".join(f"{value:.2e}" for value in probe.decay_profile())
    logger.info(f"Perp probe N={n}: sigma_min={probe.sigma_min:.3e}; minimal vector |xi_n| = [{profile}]")
    return probe


def deflate(
    coefficients: np.ndarray,
    eigenvalues_sq: np.ndarray,
    reference: int,
    group_keys: Optional[Sequence[object]] = None,
) -> np.ndarray:
    """
    (lambda_n^2 - lambda_ref^2) xi_n, with ``reference`` a 0-based mode index.

    Entries in the reference eigenvalue group (equal ``group_keys`` when given)
    are set to exactly zero.
    """
    xi = np.asarray(coefficients, dtype=float)
    lam_sq = np.asarray(eigenvalues_sq, dtype=float)
    if xi.shape != lam_sq.shape:
        raise ValueError(f"Coefficient shape {xi.shape} does not match eigenvalue shape {lam_sq.shape}")
    if not 0 <= reference < xi.size:
        raise ValueError(f"Reference index {reference} outside the active set 0..{xi.size - 1}")

    out = (lam_sq - lam_sq[reference]) * xi
    if group_keys is not None:
        keys = list(group_keys)
        out[[index for index, key in enumerate(keys) if key == keys[reference]]] = 0.0
    return out


def deflation_chain(
    coefficients: np.ndarray,
    eigenvalues_sq: np.ndarray,
    references: Sequence[int],
    group_keys: Optional[Sequence[object]] = None,
) -> List[np.ndarray]:
    """Successive deflations by each reference group; the last entry has the smallest support."""
    stages = [np.asarray(coefficients, dtype=float)]
    for reference in references:
        stages.append(deflate(stages[-1], eigenvalues_sq, reference, group_keys))
    return stages


@dataclass
class DeflationIdentity:
    identity_error: float
    deflated_error: float
    reference: int


def deflation_identity(
    domain: SpectralDomain,
    coefficients: np.ndarray,
    grid: TimeGrid,
    reference: Optional[int] = None,
) -> DeflationIdentity:
    """
    Check -d^2/dt^2 sum xi_n g_n = sum lambda_n^2 xi_n g_n for the memoryless adjoint traces
    g_n = gamma_1 phi_n psi_n, and that the deflated trace equals -(d^2/dt^2 + lambda_ref^2)
    of the combined trace. Errors are relative, in discrete L2 over interior nodes.
    """
    xi = np.asarray(coefficients, dtype=float)
    n = xi.size
    reference = n - 1 if reference is None else reference
    params = SystemParams(b=0.0, kernel=SampledKernel.zeros(grid))
    domain = domain.with_modes(max(n, domain.n_modes))
    adjoint: FieldSolution = adjoint_evolution(domain, params, domain.vector(xi), n)

    combined = adjoint.trace()
    second = (combined[:, 2:] - 2.0 * combined[:, 1:-1] + combined[:, :-2]) / grid.dt**2
    lam_sq = domain.eigenvalues_squared[:n]
    # adjoint.displacement[n] = xi_n psi_n, so scaling rows by lambda_n^2 gives sum lambda_n^2 xi_n g_n.
    weighted = domain.traces[:n].T @ (lam_sq[:, None] * adjoint.displacement)
    shift = deflate(np.ones(n), lam_sq, reference, domain.group_keys[:n])
    deflated = domain.traces[:n].T @ (shift[:, None] * adjoint.displacement)

    def relative(lhs: np.ndarray, rhs: np.ndarray) -> float:
        scale = np.linalg.norm(rhs)
        return float(np.linalg.norm(lhs - rhs) / scale) if scale > 0 else float(np.linalg.norm(lhs - rhs))

    return DeflationIdentity(
        identity_error=relative(-second, weighted[:, 1:-1]),
        deflated_error=relative(-second - lam_sq[reference] * combined[:, 1:-1], deflated[:, 1:-1]),
        reference=reference,
    )
