"""Uniform time grids and sampled kernels.

Every time-dependent quantity in the solver (memory kernels, resolvents, modal
trajectories, control samples) lives on a :class:`TimeGrid`. Kernels declared in
closed form keep their formula so exact derivatives stay available.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline

from memory_control.core.exceptions import GridMismatchError, KernelError


logger = logging.getLogger(__name__)


ArrayLike = Union[np.ndarray, list, tuple]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_j = j * dt, j = 0..n_steps, on (0, t_end)."""

    t_end: float
    n_steps: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t_end) and self.t_end > 0):
            raise ValueError(f"Time grid horizon must be positive and finite, got {self.t_end}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise ValueError(f"Time grid needs at least 2 steps, got {self.n_steps}")
        object.__setattr__(self, "t_end", float(self.t_end))
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @classmethod
    def from_step(cls, t_end: float, dt: float) -> "TimeGrid":
        """Build the grid whose step is closest to ``dt`` with t_end as an exact node."""
        if not (math.isfinite(dt) and dt > 0):
            raise ValueError(f"Time step must be positive, got {dt}")
        return cls(t_end=t_end, n_steps=max(2, int(round(t_end / dt))))

    @property
    def dt(self) -> float:
        return self.t_end / self.n_steps

    @property
    def size(self) -> int:
        return self.n_steps + 1

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = np.arange(self.size, dtype=float) * self.dt
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def trapezoid_weights(self) -> np.ndarray:
        weights = np.full(self.size, self.dt)
        weights[0] = weights[-1] = 0.5 * self.dt
        weights.setflags(write=False)
        return weights

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.t_end, self.n_steps * factor)

    def require_same(self, other: "TimeGrid", context: str = "operation") -> None:
        if self != other:
            raise GridMismatchError(self, other, context)

    def __str__(self) -> str:
        return f"TimeGrid(t_end={self.t_end:.6g}, n_steps={self.n_steps}, dt={self.dt:.3g})"


KERNEL_FAMILIES = ("zero", "constant", "exponential", "polynomial", "sine", "cosine")


@dataclass(frozen=True)
class ClosedForm:
    """Named kernel family with parameters; evaluates any derivative exactly.

    Families:
        zero                              0
        constant(c)                       c
        exponential(c, rate)              c * exp(-rate * t)
        polynomial(coefficients)          sum_k coefficients[k] * t**k
        sine(amplitude, frequency)        amplitude * sin(frequency * t)
        cosine(amplitude, frequency)      amplitude * cos(frequency * t)
    """

    name: str
    params: Dict[str, Any] = field(default_factory=dict, hash=False, compare=True)

    def __post_init__(self) -> None:
        if self.name not in KERNEL_FAMILIES:
            raise KernelError(f"Unknown kernel family '{self.name}' (known: {', '.join(KERNEL_FAMILIES)})")

    def evaluate(self, t: ArrayLike, derivative: int = 0) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if derivative < 0:
            raise ValueError(f"Derivative order must be non-negative, got {derivative}")

        p = self.params
        if self.name == "zero":
            return np.zeros_like(t)
        if self.name == "constant":
            value = float(p.get("c", 1.0)) if derivative == 0 else 0.0
            return np.full_like(t, value)
        if self.name == "exponential":
            c = float(p.get("c", 1.0))
            rate = float(p.get("rate", 1.0))
            return c * (-rate) ** derivative * np.exp(-rate * t)
        if self.name == "polynomial":
            poly = Polynomial(np.asarray(p.get("coefficients", [0.0]), dtype=float))
            return np.asarray(poly.deriv(derivative)(t) if derivative else poly(t), dtype=float)

        amplitude = float(p.get("amplitude", 1.0))
        omega = float(p.get("frequency", 1.0))
        phase = 0.5 * math.pi * derivative
        if self.name == "sine":
            return amplitude * omega**derivative * np.sin(omega * t + phase)
        return amplitude * omega**derivative * np.cos(omega * t + phase)

    def describe(self) -> str:
        args = ", ".join(f"{key}={value}" for key, value in sorted(self.params.items()))
        return f"{self.name}({args})"


@dataclass(frozen=True, eq=False)
class SampledKernel:
    """Scalar (real or complex) function of time sampled on a :class:`TimeGrid`."""

    grid: TimeGrid
    values: np.ndarray
    closed_form: Optional[ClosedForm] = None
    label: str = ""

    def __post_init__(self) -> None:
        raw = np.asarray(self.values)
        dtype = np.complex128 if np.iscomplexobj(raw) else np.float64
        values = np.array(raw, dtype=dtype, copy=True)

        if values.ndim != 1 or values.shape[0] != self.grid.size:
            raise KernelError(
                f"Kernel '{self.label}' has shape {values.shape}, expected ({self.grid.size},) for {self.grid}"
            )
        if not np.all(np.isfinite(values)):
            raise KernelError(f"Kernel '{self.label}' contains non-finite samples")

        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_closed_form(cls, closed_form: ClosedForm, grid: TimeGrid, label: Optional[str] = None) -> "SampledKernel":
        return cls(grid, closed_form.evaluate(grid.nodes), closed_form, label or closed_form.describe())

    @classmethod
    def zeros(cls, grid: TimeGrid, label: str = "0") -> "SampledKernel":
        return cls.from_closed_form(ClosedForm("zero"), grid, label)

    @classmethod
    def from_columns(cls, t: ArrayLike, values: ArrayLike, label: str = "") -> "SampledKernel":
        """Rebuild a kernel from a two-column (t, value) table."""
        t = np.asarray(t, dtype=float)
        if t.ndim != 1 or t.size < 3:
            raise KernelError("Kernel table needs at least three rows")
        if abs(t[0]) > 1e-12:
            raise KernelError(f"Kernel table must start at t = 0, got {t[0]}")

        grid = TimeGrid(float(t[-1]), t.size - 1)
        if np.max(np.abs(t - grid.nodes)) > 1e-9 * max(1.0, grid.t_end):
            raise KernelError("Kernel table is not sampled on a uniform grid")
        return cls(grid, np.asarray(values), label=label)

    @property
    def is_complex(self) -> bool:
        return bool(np.iscomplexobj(self.values))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)

    @property
    def real(self) -> "SampledKernel":
        return SampledKernel(self.grid, self.values.real, label=self.label)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def derivative(self, order: int = 1) -> "SampledKernel":
        """Exact derivative samples; only available for closed-form kernels."""
        if self.closed_form is None:
            raise KernelError(f"Kernel '{self.label}' has no closed form; derivatives are unavailable")
        values = self.closed_form.evaluate(self.grid.nodes, derivative=order)
        return SampledKernel(self.grid, values, label=f"d{order}[{self.label}]")

    def resampled(self, grid: TimeGrid) -> "SampledKernel":
        if grid == self.grid:
            return self
        if self.closed_form is not None:
            return SampledKernel.from_closed_form(self.closed_form, grid, self.label)
        if grid.t_end > self.grid.t_end * (1 + 1e-12):
            raise KernelError(f"Cannot extend sampled kernel '{self.label}' beyond t = {self.grid.t_end}")

        logger.debug(f"Resampling kernel '{self.label}' by cubic spline onto {grid}")
        spline_real = CubicSpline(self.grid.nodes, self.values.real)
        values: np.ndarray = spline_real(grid.nodes)
        if self.is_complex:
            values = values + 1j * CubicSpline(self.grid.nodes, self.values.imag)(grid.nodes)
        return SampledKernel(grid, values, label=self.label)

    def scaled(self, factor: Union[float, complex, np.ndarray], label: Optional[str] = None) -> "SampledKernel":
        return SampledKernel(self.grid, self.values * factor, label=label or self.label)

    def to_columns(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.grid.nodes), np.asarray(self.values)

    def _combine(self, other: "SampledKernel", sign: float) -> "SampledKernel":
        self.grid.require_same(other.grid, "kernel arithmetic")
        return SampledKernel(self.grid, self.values + sign * other.values)

    def __add__(self, other: "SampledKernel") -> "SampledKernel":
        return self._combine(other, 1.0)

    def __sub__(self, other: "SampledKernel") -> "SampledKernel":
        return self._combine(other, -1.0)

    def __neg__(self) -> "SampledKernel":
        return SampledKernel(self.grid, -self.values, label=f"-{self.label}")

    def __repr__(self) -> str:
        kind = "complex" if self.is_complex else "real"
        return f"SampledKernel('{self.label}', {kind}, {self.grid})"
