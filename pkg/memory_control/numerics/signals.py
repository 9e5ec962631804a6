"""Boundary control signals on Gamma x (0, T).

A control is a set of coefficients per Gamma node over a time basis, together
with its grid samples. The default basis is one piecewise-linear hat per grid
node, in which case coefficients and samples coincide.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from memory_control.core.exceptions import GridMismatchError
from memory_control.numerics.kernels import TimeGrid


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ControlBasis:
    """
    Time basis of a control.

    kind='hats' with size=None uses one hat per grid node; with a size m it uses m
    hats on a uniform coarse mesh of (0, T). kind='trig' uses 1, cos(2 pi k t/T),
    sin(2 pi k t/T), ... truncated to ``size`` functions.
    """

    kind: str = "hats"
    size: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in ("hats", "trig"):
            raise ValueError(f"Unknown control basis '{self.kind}' (use hats or trig)")
        if self.kind == "trig" and self.size is None:
            raise ValueError("Trigonometric control basis needs a size")
        if self.size is not None and self.size < (2 if self.kind == "hats" else 1):
            raise ValueError(f"Control basis size too small: {self.size}")

    @property
    def is_grid_hats(self) -> bool:
        return self.kind == "hats" and self.size is None

    def n_functions(self, grid: TimeGrid) -> int:
        return grid.size if self.size is None else self.size

    def matrix(self, grid: TimeGrid) -> np.ndarray:
        """Sample matrix P (grid.size x n_functions); samples = P @ coefficients."""
        t = grid.nodes
        if self.is_grid_hats:
            return np.eye(grid.size)
        if self.kind == "hats":
            assert self.size is not None
            centers = np.linspace(0.0, grid.t_end, self.size)
            width = centers[1] - centers[0]
            return np.clip(1.0 - np.abs(t[:, None] - centers[None, :]) / width, 0.0, None)

        assert self.size is not None
        columns = [np.ones_like(t)]
        k = 1
        while len(columns) < self.size:
            omega = 2.0 * math.pi * k / grid.t_end
            columns.append(np.cos(omega * t))
            if len(columns) < self.size:
                columns.append(np.sin(omega * t))
            k += 1
        return np.column_stack(columns)

    def describe(self) -> str:
        return "hats(grid)" if self.is_grid_hats else f"{self.kind}({self.size})"


@dataclass(frozen=True, eq=False)
class ControlSignal:
    """Boundary control: coefficients (n_gamma, n_functions) and samples (n_gamma, grid.size)."""

    grid: TimeGrid
    basis: ControlBasis
    nodes: np.ndarray
    node_weights: np.ndarray
    coefficients: np.ndarray
    samples: np.ndarray

    def __post_init__(self) -> None:
        for name in ("nodes", "node_weights", "coefficients", "samples"):
            array = np.array(getattr(self, name), dtype=float, copy=True)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        expected = (self.node_weights.size, self.grid.size)
        if self.samples.shape != expected:
            raise GridMismatchError(self.samples.shape, expected, "control samples")

    @classmethod
    def from_coefficients(
        cls,
        grid: TimeGrid,
        basis: ControlBasis,
        nodes: np.ndarray,
        node_weights: np.ndarray,
        coefficients: np.ndarray,
    ) -> "ControlSignal":
        coefficients = np.atleast_2d(np.asarray(coefficients, dtype=float))
        samples = coefficients if basis.is_grid_hats else coefficients @ basis.matrix(grid).T
        return cls(grid, basis, nodes, node_weights, coefficients, samples)

    @classmethod
    def from_samples(
        cls, grid: TimeGrid, nodes: np.ndarray, node_weights: np.ndarray, samples: np.ndarray
    ) -> "ControlSignal":
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        return cls(grid, ControlBasis(), nodes, node_weights, samples, samples)

    @classmethod
    def zeros(cls, grid: TimeGrid, nodes: np.ndarray, node_weights: np.ndarray) -> "ControlSignal":
        return cls.from_samples(grid, nodes, node_weights, np.zeros((np.size(node_weights), grid.size)))

    @property
    def n_gamma(self) -> int:
        return int(self.node_weights.size)

    def l2_norm(self) -> float:
        """Discrete L2(Gamma x (0, T)) norm with trapezoid weights in time."""
        mass = self.node_weights[:, None] * self.grid.trapezoid_weights[None, :]
        return float(np.sqrt(np.sum(mass * self.samples**2)))

    def resampled(self, grid: TimeGrid) -> "ControlSignal":
        """Piecewise-linear resampling onto another grid over the same horizon."""
        if grid == self.grid:
            return self
        if abs(grid.t_end - self.grid.t_end) > 1e-12 * self.grid.t_end:
            raise GridMismatchError(self.grid, grid, "control resampling (different horizon)")
        samples = np.vstack([np.interp(grid.nodes, self.grid.nodes, row) for row in self.samples])
        return ControlSignal.from_samples(grid, self.nodes, self.node_weights, samples)

    def scaled(self, factor: float) -> "ControlSignal":
        return ControlSignal(
            self.grid, self.basis, self.nodes, self.node_weights, self.coefficients * factor, self.samples * factor
        )

    def __add__(self, other: "ControlSignal") -> "ControlSignal":
        self.grid.require_same(other.grid, "control sum")
        return ControlSignal.from_samples(self.grid, self.nodes, self.node_weights, self.samples + other.samples)

    def to_columns(self) -> tuple:
        header = ["t"] + [f"f_{m}" for m in range(self.n_gamma)]
        return header, np.column_stack([self.grid.nodes, self.samples.T])
