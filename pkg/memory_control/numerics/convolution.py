"""Uniform-grid convolution algebra.

Convolutions, iterated convolutions and Volterra resolvent kernels on a
:class:`~memory_control.numerics.kernels.TimeGrid`, plus exact samples of the
four trigonometric convolution identities used as oracles.

Test Coverage: tests/test_convolution.py
- Quadrature weights (trapezoid, Gregory) and history sums
- Commutativity, bilinearity, closed-form convolutions and convergence order
- Resolvent marching, defect, rejection of unstable diagonal steps
- Trigonometric identity oracles
"""

import logging
from typing import Dict, Sequence, Tuple

import numpy as np

from memory_control.core.exceptions import ConvolutionError, ResolventError
from memory_control.numerics.kernels import ClosedForm, SampledKernel, TimeGrid


logger = logging.getLogger(__name__)


class QuadratureRule:
    """
    Convolution quadrature weights w_{j,i} for integrals over (0, t_j).

    The weights are 1 in the interior and ``end_weights`` at both ends once
    j is large enough for the two ends not to overlap; shorter intervals use
    explicit tables. All weight sets are symmetric (w_{j,i} = w_{j,j-i}).
    """

    def __init__(self, name: str, end_weights: Sequence[float], tables: Dict[int, Sequence[float]]):
        self.name = name
        self.end_weights = tuple(float(w) for w in end_weights)
        self.threshold = 2 * len(self.end_weights) - 1
        self._tables = {j: np.asarray(weights, dtype=float) for j, weights in tables.items()}
        self._tables[0] = np.zeros(1)

        missing = [j for j in range(self.threshold) if j not in self._tables]
        if missing:
            raise ValueError(f"Quadrature rule '{name}' lacks weight tables for j = {missing}")

    def weights(self, j: int) -> np.ndarray:
        """Full weight vector (w_{j,0}, ..., w_{j,j})."""
        if j < self.threshold:
            return self._tables[j].copy()
        weights = np.ones(j + 1)
        for i, end in enumerate(self.end_weights):
            weights[i] = weights[j - i] = end
        return weights

    def diagonal_weight(self, j: int) -> float:
        """Weight w_{j,j} attached to the newest sample."""
        if j < self.threshold:
            return float(self._tables[j][-1])
        return self.end_weights[0]

    @property
    def max_diagonal_weight(self) -> float:
        return max([self.end_weights[0]] + [float(t[-1]) for t in self._tables.values()])

    def history_sum(self, kernel: np.ndarray, history: np.ndarray, j: int) -> complex:
        """Sum_i w_{j,i} kernel[j-i] history[i] for i = 0..j (without the dt factor)."""
        if j == 0:
            return 0.0
        if j < self.threshold:
            return np.dot(self._tables[j] * kernel[j::-1], history[: j + 1])

        total = np.dot(kernel[j::-1], history[: j + 1])
        for i, end in enumerate(self.end_weights):
            total += (end - 1.0) * (kernel[j - i] * history[i] + kernel[i] * history[j - i])
        return total

    def convolve_arrays(self, a: np.ndarray, b: np.ndarray, dt: float) -> np.ndarray:
        """All partial convolutions (a*b)(t_j), j = 0..n-1, in one pass."""
        n = a.shape[0]
        out = np.convolve(a, b)[:n]

        j = np.arange(self.threshold, n)
        for i, end in enumerate(self.end_weights):
            out[j] += (end - 1.0) * (a[j - i] * b[i] + a[i] * b[j - i])
        for small in range(min(self.threshold, n)):
            out[small] = np.dot(self._tables[small] * a[small::-1], b[: small + 1])
        return out * dt

    def __repr__(self) -> str:
        return f"QuadratureRule('{self.name}')"


TRAPEZOID = QuadratureRule("trapezoid", end_weights=(0.5,), tables={})

# Fourth-order extended rule with Simpson-family tables for the first four intervals.
GREGORY = QuadratureRule(
    "gregory",
    end_weights=(3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0),
    tables={
        1: (0.5, 0.5),
        2: (1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0),
        3: (3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0),
        4: (1.0 / 3.0, 4.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0),
    },
)

QUADRATURE_RULES = {"trapezoid": TRAPEZOID, "gregory": GREGORY}


def get_rule(name: str) -> QuadratureRule:
    try:
        return QUADRATURE_RULES[name]
    except KeyError:
        raise ValueError(f"Unknown quadrature rule '{name}' (known: {', '.join(QUADRATURE_RULES)})") from None


def _canonical_pair(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # Fixed operand order makes a*b and b*a the same floating-point computation.
    if (a.dtype.str, a.tobytes()) <= (b.dtype.str, b.tobytes()):
        return a, b
    return b, a


def convolve(a: SampledKernel, b: SampledKernel, rule: QuadratureRule = TRAPEZOID) -> SampledKernel:
    """
    Discrete convolution (a*b)(t_j) = integral_0^{t_j} a(t_j - s) b(s) ds.

    Args:
        a: Left factor
        b: Right factor (same grid as ``a``)
        rule: Convolution quadrature (default: trapezoid)

    Returns:
        Sampled convolution on the shared grid

    Raises:
        GridMismatchError: If the factors live on different grids
    """
    a.grid.require_same(b.grid, "convolve")
    first, second = _canonical_pair(a.values, b.values)
    values = rule.convolve_arrays(first, second, a.grid.dt)
    return SampledKernel(a.grid, values, label=f"({a.label}*{b.label})")


def iterated_convolution(k: SampledKernel, m: int, rule: QuadratureRule = TRAPEZOID) -> SampledKernel:
    """Convolution power k^{*m}, nested as k * k^{*(m-1)}."""
    if m < 1:
        raise ConvolutionError(f"Convolution power must be >= 1, got {m} (no identity kernel on a sample grid)")

    result = k
    for _ in range(m - 1):
        result = convolve(k, result, rule)
    return SampledKernel(k.grid, result.values, label=f"{k.label}^*{m}")


def resolvent_defect(k: SampledKernel, r: SampledKernel, rule: QuadratureRule = TRAPEZOID) -> float:
    """Sup-norm of r - k + k*r."""
    return float(np.max(np.abs(r.values - k.values + convolve(k, r, rule).values)))


def resolvent_kernel(
    k: SampledKernel,
    rule: QuadratureRule = TRAPEZOID,
    tolerance: float = 1e-8,
) -> SampledKernel:
    """
    Volterra resolvent r solving r = k - k*r, marched node by node.

    Args:
        k: Kernel (real or complex)
        rule: Convolution quadrature used for the memory sums
        tolerance: Admissible defect relative to max(1, sup|k|)

    Returns:
        Resolvent kernel on the grid of ``k``

    Raises:
        ResolventError: If the implicit diagonal step is not invertible on this grid
            (dt * |k(0)| * w_jj >= 1) or the defect exceeds the tolerance
    """
    grid = k.grid
    dt = grid.dt
    kv = k.values

    if dt * abs(kv[0]) * rule.max_diagonal_weight >= 1.0:
        raise ResolventError(f"diagonal step not invertible, dt*|k(0)|*w = {dt * abs(kv[0]) * rule.max_diagonal_weight:.3g}", dt=dt)

    r = np.zeros(grid.size, dtype=kv.dtype)
    r[0] = kv[0]
    for j in range(1, grid.size):
        # r[j] is still zero here, so the history sum covers i < j only.
        history = rule.history_sum(kv, r, j)
        r[j] = (kv[j] - dt * history) / (1.0 + dt * rule.diagonal_weight(j) * kv[0])

    resolvent = SampledKernel(grid, r, label=f"res[{k.label}]")

    defect = resolvent_defect(k, resolvent, rule)
    scale = max(1.0, k.sup_norm())
    if defect > tolerance * scale:
        raise ResolventError(f"defect {defect:.3e} exceeds tolerance {tolerance * scale:.3e}", defect=defect)

    logger.debug(f"Resolvent of '{k.label}' on {grid}: defect {defect:.2e}")
    return resolvent


# Closed forms of convolutions of S = sin(lam t) and C = cos(lam t).
TRIG_IDENTITIES: Dict[str, Tuple[str, Tuple[str, ...]]] = {
    "SC": ("S*C = t S / 2", ("S", "C")),
    "SSC": ("S*S*C = -(t^2 C - t S / lam) / 8", ("S", "S", "C")),
    "CC": ("C*C = (t C + S / lam) / 2", ("C", "C")),
    "SCC": ("S*C*C = ((t^2 + 1/lam^2) S - t C / lam) / 8", ("S", "C", "C")),
}


def identity_factors(identity_id: str) -> Tuple[str, ...]:
    if identity_id not in TRIG_IDENTITIES:
        raise ValueError(f"Unknown identity '{identity_id}' (known: {', '.join(TRIG_IDENTITIES)})")
    return TRIG_IDENTITIES[identity_id][1]


def trig_factor(symbol: str, lam: float, grid: TimeGrid) -> SampledKernel:
    """Sampled S = sin(lam t) or C = cos(lam t)."""
    family = {"S": "sine", "C": "cosine"}[symbol]
    return SampledKernel.from_closed_form(ClosedForm(family, {"frequency": lam}), grid, label=symbol)


def trig_identity_oracle(identity_id: str, lam: float, grid: TimeGrid) -> SampledKernel:
    """Exact samples of one of the trigonometric convolution identities."""
    identity_factors(identity_id)
    if lam <= 0:
        raise ValueError(f"Frequency must be positive, got {lam}")

    t = grid.nodes
    s = np.sin(lam * t)
    c = np.cos(lam * t)
    if identity_id == "SC":
        values = 0.5 * t * s
    elif identity_id == "SSC":
        values = -(t**2 * c - t * s / lam) / 8.0
    elif identity_id == "CC":
        values = 0.5 * (t * c + s / lam)
    else:
        values = ((t**2 + 1.0 / lam**2) * s - t * c / lam) / 8.0
    return SampledKernel(grid, values, label=f"{identity_id}[lam={lam:g}]")


def convolve_factors(factors: Sequence[str], lam: float, grid: TimeGrid, rule: QuadratureRule = TRAPEZOID) -> SampledKernel:
    """Numeric left-to-right convolution of a sequence of S/C factors."""
    result = trig_factor(factors[0], lam, grid)
    for symbol in factors[1:]:
        result = convolve(result, trig_factor(symbol, lam, grid), rule)
    return result
