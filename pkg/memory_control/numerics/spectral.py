"""Dirichlet eigenpairs, boundary traces and spectral norms for built-in domains.

Test Coverage: tests/test_spectral.py
- Interval and rectangle spectra, multiplicity groups, trace values
- Sobolev norms, Dirichlet-lift coefficients, L2 projection
- Orthonormality under Gauss-Legendre quadrature, Weyl fit
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from memory_control.core.exceptions import DomainError


logger = logging.getLogger(__name__)


INTERVAL_GAMMA = {"left": ("left",), "right": ("right",), "both": ("left", "right")}
RECTANGLE_EDGES = ("left", "right", "bottom", "top")


@dataclass(frozen=True, eq=False)
class SpectralVector:
    """Coefficients c_n of sum_n c_n phi_n together with the eigenvalues lambda_n."""

    coefficients: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self) -> None:
        coefficients = np.array(self.coefficients, dtype=float, copy=True)
        eigenvalues = np.array(self.eigenvalues, dtype=float, copy=True)
        if coefficients.ndim != 1 or coefficients.shape != eigenvalues.shape:
            raise ValueError(
                f"Coefficient shape {coefficients.shape} does not match eigenvalue shape {eigenvalues.shape}"
            )
        if not np.all(np.isfinite(coefficients)):
            raise ValueError("Spectral coefficients must be finite")
        coefficients.setflags(write=False)
        eigenvalues.setflags(write=False)
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "eigenvalues", eigenvalues)

    @property
    def n_modes(self) -> int:
        return int(self.coefficients.size)

    def norm(self, s: int = 0) -> float:
        return sobolev_norm(self, s)

    def truncated(self, n: int) -> "SpectralVector":
        return SpectralVector(self.coefficients[:n], self.eigenvalues[:n])

    def padded(self, domain: "SpectralDomain") -> "SpectralVector":
        """Same function expressed on all modes of ``domain`` (zero beyond the current modes)."""
        n = min(self.n_modes, domain.n_modes)
        coefficients = np.zeros(domain.n_modes)
        coefficients[:n] = self.coefficients[:n]
        return SpectralVector(coefficients, domain.eigenvalues)

    def __add__(self, other: "SpectralVector") -> "SpectralVector":
        return SpectralVector(self.coefficients + other.coefficients, self.eigenvalues)

    def __sub__(self, other: "SpectralVector") -> "SpectralVector":
        return SpectralVector(self.coefficients - other.coefficients, self.eigenvalues)

    def scaled(self, factor: float) -> "SpectralVector":
        return SpectralVector(self.coefficients * factor, self.eigenvalues)


@dataclass(frozen=True)
class WeylFit:
    """Bounds m0 n^(2/d) <= lambda_n^2 <= M n^(2/d) fitted over the available modes."""

    lower: float
    upper: float
    slope: float
    n_modes: int


@dataclass(frozen=True, eq=False)
class SpectralDomain:
    """
    Dirichlet spectrum of a built-in domain with its active boundary Gamma.

    Modes are ordered by nondecreasing eigenvalue. ``traces[n, m]`` holds the
    exterior normal derivative of phi_n at Gamma node m; ``gamma_weights`` is
    the boundary quadrature (counting measure in 1D).
    """

    kind: str
    dimension: int
    sizes: Tuple[float, ...]
    gamma: Tuple[str, ...]
    eigenvalues: np.ndarray
    labels: Tuple[Tuple[int, ...], ...]
    group_keys: Tuple[Fraction, ...]
    gamma_nodes: np.ndarray
    gamma_weights: np.ndarray
    traces: np.ndarray
    nodes_per_edge: int = 0

    def __post_init__(self) -> None:
        for name in ("eigenvalues", "gamma_nodes", "gamma_weights", "traces"):
            array = np.array(getattr(self, name), dtype=float, copy=True)
            array.setflags(write=False)
            object.__setattr__(self, name, array)

    @property
    def n_modes(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def n_gamma(self) -> int:
        return int(self.gamma_weights.size)

    @property
    def eigenvalues_squared(self) -> np.ndarray:
        return self.eigenvalues**2

    @property
    def normalized_traces(self) -> np.ndarray:
        """Psi_n = gamma_1 phi_n / lambda_n at the Gamma nodes."""
        return self.traces / self.eigenvalues[:, None]

    @property
    def max_frequency(self) -> float:
        return float(self.eigenvalues[-1])

    def evaluate(self, points: Union[np.ndarray, Sequence[float]]) -> np.ndarray:
        """Eigenfunction values phi_n(x), shape (n_points, n_modes)."""
        points = np.asarray(points, dtype=float)
        if self.dimension == 1:
            x = points.reshape(-1)
            (length,) = self.sizes
            n = np.array([label[0] for label in self.labels], dtype=float)
            return math.sqrt(2.0 / length) * np.sin(np.outer(x, n) * math.pi / length)

        points = points.reshape(-1, 2)
        a, b = self.sizes
        j = np.array([label[0] for label in self.labels], dtype=float)
        k = np.array([label[1] for label in self.labels], dtype=float)
        amplitude = 2.0 / math.sqrt(a * b)
        return amplitude * np.sin(np.outer(points[:, 0], j) * math.pi / a) * np.sin(np.outer(points[:, 1], k) * math.pi / b)

    def truncate(self, n: int) -> "SpectralDomain":
        """First ``n`` modes of this domain."""
        if not 1 <= n <= self.n_modes:
            raise DomainError(f"Cannot truncate {self.n_modes} modes to {n}")
        return SpectralDomain(
            kind=self.kind,
            dimension=self.dimension,
            sizes=self.sizes,
            gamma=self.gamma,
            eigenvalues=self.eigenvalues[:n],
            labels=self.labels[:n],
            group_keys=self.group_keys[:n],
            gamma_nodes=self.gamma_nodes,
            gamma_weights=self.gamma_weights,
            traces=self.traces[:n],
            nodes_per_edge=self.nodes_per_edge,
        )

    def with_modes(self, n: int) -> "SpectralDomain":
        """Same geometry and Gamma with exactly ``n`` modes (rebuilt when more are needed)."""
        if n <= self.n_modes:
            return self.truncate(n)
        if self.kind == "interval":
            gamma = "both" if len(self.gamma) == 2 else self.gamma[0]
            return interval_domain(self.sizes[0], n, gamma)
        a, b = self.sizes
        return rectangle_domain(a, b, gamma_edges=self.gamma, nodes_per_edge=self.nodes_per_edge, n_max=n)

    def groups(self) -> List[List[int]]:
        """Mode indices sharing one eigenvalue, in spectral order."""
        grouped: Dict[Fraction, List[int]] = {}
        for index, key in enumerate(self.group_keys):
            grouped.setdefault(key, []).append(index)
        return list(grouped.values())

    def vector(self, coefficients: Union[np.ndarray, Sequence[float]]) -> SpectralVector:
        coefficients = np.asarray(coefficients, dtype=float)
        if coefficients.size > self.n_modes:
            raise DomainError(f"{coefficients.size} coefficients given for a domain with {self.n_modes} modes")
        padded = np.zeros(self.n_modes)
        padded[: coefficients.size] = coefficients
        return SpectralVector(padded, self.eigenvalues)

    def zeros(self) -> SpectralVector:
        return SpectralVector(np.zeros(self.n_modes), self.eigenvalues)

    def mode(self, index: int) -> SpectralVector:
        """Unit vector phi_index (1-based like the labels of the interval spectrum)."""
        coefficients = np.zeros(self.n_modes)
        coefficients[index - 1] = 1.0
        return SpectralVector(coefficients, self.eigenvalues)

    def _quadrature(self, extra: int = 32) -> Tuple[np.ndarray, np.ndarray]:
        if self.dimension == 1:
            (length,) = self.sizes
            order = 2 * max(label[0] for label in self.labels) + extra
            x, w = np.polynomial.legendre.leggauss(order)
            return 0.5 * length * (x + 1.0), 0.5 * length * w

        a, b = self.sizes
        jx, wx = np.polynomial.legendre.leggauss(2 * max(label[0] for label in self.labels) + extra)
        ky, wy = np.polynomial.legendre.leggauss(2 * max(label[1] for label in self.labels) + extra)
        xx, yy = np.meshgrid(0.5 * a * (jx + 1.0), 0.5 * b * (ky + 1.0), indexing="ij")
        weights = np.outer(0.5 * a * wx, 0.5 * b * wy)
        return np.column_stack([xx.ravel(), yy.ravel()]), weights.ravel()

    def orthonormality_defect(self) -> float:
        """max |<phi_m, phi_n> - delta_mn| under Gauss-Legendre quadrature."""
        points, weights = self._quadrature()
        phi = self.evaluate(points)
        gram = phi.T @ (weights[:, None] * phi)
        return float(np.max(np.abs(gram - np.eye(self.n_modes))))

    def weyl_fit(self) -> WeylFit:
        n = np.arange(1, self.n_modes + 1, dtype=float)
        scale = n ** (2.0 / self.dimension)
        ratios = self.eigenvalues_squared / scale
        slope = float(np.dot(scale, self.eigenvalues_squared) / np.dot(scale, scale))
        return WeylFit(lower=float(ratios.min()), upper=float(ratios.max()), slope=slope, n_modes=self.n_modes)

    def eigen_table(self) -> Tuple[List[str], np.ndarray]:
        """Header and rows (n, lambda_n, gamma_1 phi_n at each Gamma node)."""
        header = ["n", "lambda"] + [f"trace_{m}" for m in range(self.n_gamma)]
        index = np.arange(1, self.n_modes + 1, dtype=float)
        return header, np.column_stack([index, self.eigenvalues, self.traces])

    def describe(self) -> str:
        geometry = "x".join(f"{size:.6g}" for size in self.sizes)
        return f"{self.kind}({geometry}, Gamma={'+'.join(self.gamma)}, modes={self.n_modes})"


def interval_domain(length: float, n_max: int, gamma: str = "both") -> SpectralDomain:
    """
    Dirichlet spectrum of (0, length).

    Args:
        length: Interval length (> 0)
        n_max: Number of modes (>= 1)
        gamma: Active boundary, one of 'left', 'right', 'both'

    Returns:
        SpectralDomain with lambda_n = n pi / length and exterior normal-derivative traces

    Raises:
        DomainError: If the geometry is invalid or Gamma is empty
    """
    if not (math.isfinite(length) and length > 0):
        raise DomainError(f"Interval length must be positive, got {length}")
    if n_max < 1:
        raise DomainError(f"Need at least one mode, got n_max={n_max}")
    if gamma not in INTERVAL_GAMMA:
        raise DomainError(f"Empty or unknown active boundary '{gamma}' (use left, right or both)")

    sides = INTERVAL_GAMMA[gamma]
    n = np.arange(1, n_max + 1)
    eigenvalues = n * math.pi / length
    amplitude = math.sqrt(2.0 / length)

    columns = []
    nodes = []
    for side in sides:
        if side == "left":
            columns.append(-amplitude * eigenvalues)
            nodes.append(0.0)
        else:
            columns.append(amplitude * eigenvalues * np.where(n % 2 == 0, 1.0, -1.0))
            nodes.append(length)

    return SpectralDomain(
        kind="interval",
        dimension=1,
        sizes=(float(length),),
        gamma=sides,
        eigenvalues=eigenvalues,
        labels=tuple((int(i),) for i in n),
        group_keys=tuple(Fraction(int(i) ** 2) for i in n),
        gamma_nodes=np.array(nodes),
        gamma_weights=np.ones(len(sides)),
        traces=np.column_stack(columns),
    )


def _rectangle_modes(
    a: float, b: float, lambda_cutoff: Optional[float], n_max: Optional[int]
) -> List[Tuple[Fraction, int, int]]:
    ratio_sq = (Fraction(a) / Fraction(b)) ** 2
    unit = (math.pi / a) ** 2

    if lambda_cutoff is not None:
        bound_sq = lambda_cutoff**2
        j_max = int(math.floor(lambda_cutoff * a / math.pi))
        k_max = int(math.floor(lambda_cutoff * b / math.pi))
    else:
        assert n_max is not None
        bound_sq = math.inf
        j_max = k_max = n_max

    modes = []
    for j in range(1, j_max + 1):
        for k in range(1, k_max + 1):
            key = j * j + k * k * ratio_sq
            if unit * float(key) <= bound_sq * (1 + 1e-14):
                modes.append((key, j, k))
    modes.sort()
    if n_max is not None:
        modes = modes[:n_max]
    return modes


def rectangle_domain(
    a: float,
    b: float,
    lambda_cutoff: Optional[float] = None,
    gamma_edges: Sequence[str] = ("left", "bottom"),
    nodes_per_edge: int = 65,
    n_max: Optional[int] = None,
) -> SpectralDomain:
    """
    Dirichlet spectrum of (0, a) x (0, b).

    Modes (j, k) are sorted by the exact key j^2 + k^2 (a/b)^2, which also defines
    the multiplicity groups; lambda is evaluated once per group so equal eigenvalues
    are bitwise equal. Gamma uses composite trapezoid nodes on each active edge.
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"Rectangle sides must be positive, got a={a}, b={b}")
    edges = tuple(edge for edge in RECTANGLE_EDGES if edge in set(gamma_edges))
    unknown = set(gamma_edges) - set(RECTANGLE_EDGES)
    if unknown or not edges:
        raise DomainError(f"Active boundary must be a nonempty subset of {RECTANGLE_EDGES}, got {list(gamma_edges)}")
    if nodes_per_edge < 2:
        raise DomainError(f"Need at least 2 nodes per edge, got {nodes_per_edge}")
    if lambda_cutoff is None and n_max is None:
        raise DomainError("Rectangle spectrum needs lambda_cutoff or n_max")

    ground = math.pi * math.sqrt(1.0 / a**2 + 1.0 / b**2)
    if lambda_cutoff is not None and lambda_cutoff < ground * (1 - 1e-14):
        raise DomainError(f"Cutoff {lambda_cutoff:.6g} is below the ground eigenvalue {ground:.6g}")

    modes = _rectangle_modes(a, b, lambda_cutoff, n_max)
    unit = math.pi / a
    lam_by_key: Dict[Fraction, float] = {}
    for key, _, _ in modes:
        lam_by_key.setdefault(key, unit * math.sqrt(float(key)))
    eigenvalues = np.array([lam_by_key[key] for key, _, _ in modes])
    j = np.array([mode[1] for mode in modes], dtype=float)
    k = np.array([mode[2] for mode in modes], dtype=float)

    s = np.linspace(0.0, 1.0, nodes_per_edge)
    edge_weight = np.full(nodes_per_edge, 1.0 / (nodes_per_edge - 1))
    edge_weight[0] = edge_weight[-1] = 0.5 / (nodes_per_edge - 1)
    amplitude = 2.0 / math.sqrt(a * b)
    jx = j * math.pi / a
    ky = k * math.pi / b

    node_blocks, weight_blocks, trace_blocks = [], [], []
    for edge in edges:
        if edge in ("left", "right"):
            y = s * b
            x = np.zeros_like(y) if edge == "left" else np.full_like(y, a)
            sign = -1.0 if edge == "left" else np.where(j % 2 == 0, 1.0, -1.0)
            trace = amplitude * sign * jx * np.sin(np.outer(y, ky))
            weights = edge_weight * b
        else:
            x = s * a
            y = np.zeros_like(x) if edge == "bottom" else np.full_like(x, b)
            sign = -1.0 if edge == "bottom" else np.where(k % 2 == 0, 1.0, -1.0)
            trace = amplitude * sign * ky * np.sin(np.outer(x, jx))
            weights = edge_weight * a
        node_blocks.append(np.column_stack([x, y]))
        weight_blocks.append(weights)
        trace_blocks.append(trace.T)

    logger.debug(f"Rectangle {a:.4g}x{b:.4g}: {len(modes)} modes, {len(lam_by_key)} eigenvalue groups")

    return SpectralDomain(
        kind="rectangle",
        dimension=2,
        sizes=(float(a), float(b)),
        gamma=edges,
        eigenvalues=eigenvalues,
        labels=tuple((int(mode[1]), int(mode[2])) for mode in modes),
        group_keys=tuple(mode[0] for mode in modes),
        gamma_nodes=np.vstack(node_blocks),
        gamma_weights=np.concatenate(weight_blocks),
        traces=np.hstack(trace_blocks),
        nodes_per_edge=nodes_per_edge,
    )


def sobolev_norm(v: SpectralVector, s: int = 0) -> float:
    """Spectral norm (sum lambda_n^(2s) c_n^2)^(1/2) for s in {-1, 0, 1}."""
    if s not in (-1, 0, 1):
        raise ValueError(f"Sobolev index must be -1, 0 or 1, got {s}")
    weights = v.eigenvalues ** (2 * s)
    return float(np.sqrt(np.sum(weights * v.coefficients**2)))


def dirichlet_lift_coefficients(domain: SpectralDomain, f_snapshot: Union[np.ndarray, Sequence[float]]) -> SpectralVector:
    """Modal coefficients of the harmonic lift of boundary data: -(1/lambda_n^2) sum_Gamma w gamma_1 phi_n f."""
    f_snapshot = np.asarray(f_snapshot, dtype=float)
    if f_snapshot.shape != (domain.n_gamma,):
        raise DomainError(f"Boundary snapshot has shape {f_snapshot.shape}, expected ({domain.n_gamma},)")
    coefficients = -(domain.traces @ (domain.gamma_weights * f_snapshot)) / domain.eigenvalues_squared
    return SpectralVector(coefficients, domain.eigenvalues)


def project_function(domain: SpectralDomain, fn: Callable[..., np.ndarray]) -> SpectralVector:
    """L2 coefficients <fn, phi_n> by Gauss-Legendre quadrature (fn(x) in 1D, fn(x, y) in 2D)."""
    points, weights = domain._quadrature(extra=64)
    if domain.dimension == 1:
        values = np.asarray(fn(points), dtype=float)
    else:
        values = np.asarray(fn(points[:, 0], points[:, 1]), dtype=float)
    phi = domain.evaluate(points)
    return SpectralVector(phi.T @ (weights * values), domain.eigenvalues)
