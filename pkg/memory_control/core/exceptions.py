"""Custom exceptions for the memory-control library.

Test Coverage: integrated with solver, runner, API, and CLI tests
- ValidationError: raised by config loading and the validator, caught in CLI/API
- StabilityError: raised by the modal time stepper, surfaced verbatim by the CLI
- ControllabilityError: raised by min-norm synthesis, exercised by the negative control
- ResolventError / SeriesDivergenceError: raised by the convolution engine and Picard kernel
"""

from typing import List, Optional


class MemoryControlError(Exception):
    """Base exception for all memory-control errors."""
    pass


class ValidationError(MemoryControlError):
    """Raised when experiment configuration validation fails."""

    def __init__(self, errors: List[str], message: Optional[str] = None):
        self.errors = errors
        if message is None:
            message = f"Validation failed with {len(errors)} error(s):\n" + "\n".join(
                f"  - {error}" for error in errors
            )
        super().__init__(message)


class GridMismatchError(MemoryControlError):
    """Raised when two sampled quantities live on different time grids."""

    def __init__(self, left: object, right: object, context: str = "operation"):
        self.left = left
        self.right = right
        super().__init__(f"Time grid mismatch in {context}: {left} vs {right}")


class KernelError(MemoryControlError):
    """Raised when a sampled kernel is malformed or lacks a required closed form."""
    pass


class ConvolutionError(MemoryControlError):
    """Raised for invalid convolution requests (e.g. a zeroth convolution power)."""
    pass


class ResolventError(MemoryControlError):
    """Raised when the resolvent march cannot be carried out or misses its defect tolerance."""

    def __init__(self, message: str, dt: Optional[float] = None, defect: Optional[float] = None):
        self.dt = dt
        self.defect = defect
        full_message = f"Resolvent kernel failed: {message}"
        if dt is not None:
            full_message += f" (refine the grid: try dt <= {dt / 2:.3g})"
        super().__init__(full_message)


class StabilityError(MemoryControlError):
    """Raised when the explicit modal scheme violates its CFL bound dt * lambda < 2."""

    def __init__(self, dt: float, lam: float):
        self.dt = dt
        self.lam = lam
        self.suggested_dt = 1.0 / lam
        super().__init__(
            f"Unstable time step: dt * lambda = {dt * lam:.4g} >= 2 (dt={dt:.4g}, lambda={lam:.4g}); "
            f"use dt <= {self.suggested_dt:.4g}"
        )


class TransformError(MemoryControlError):
    """Raised when the MacCamy transform cannot be derived (missing kernel derivatives)."""
    pass


class SeriesDivergenceError(MemoryControlError):
    """Raised when the Picard series does not decay or disagrees with the resolvent path."""
    pass


class ReconstructionError(MemoryControlError):
    """Raised when an assembled physical solution keeps a non-negligible imaginary part."""
    pass


class DomainError(MemoryControlError):
    """Raised for invalid spectral domain definitions."""
    pass


class ControllabilityError(MemoryControlError):
    """Raised when the input map is numerically rank deficient and no regularization was requested."""

    def __init__(self, sigma_min: float, sigma_max: float, rcond: float):
        self.sigma_min = sigma_min
        self.sigma_max = sigma_max
        self.rcond = rcond
        ratio = sigma_min / sigma_max if sigma_max > 0 else 0.0
        super().__init__(
            f"Input map is numerically rank deficient: sigma_min/sigma_max = {ratio:.3e} < {rcond:.1e}. "
            f"Regularize (epsilon > 0) or enlarge the control horizon T."
        )


class ExperimentError(MemoryControlError):
    """Raised when an experiment cannot be executed."""

    def __init__(self, name: str, original_error: Optional[Exception] = None):
        self.name = name
        self.original_error = original_error

        message = f"Experiment '{name}' failed"
        if original_error:
            message += f": {str(original_error)}"

        super().__init__(message)


class StorageError(MemoryControlError):
    """Raised when storage operation fails."""
    pass


class CacheError(MemoryControlError):
    """Raised when cache operation fails."""
    pass
