"""Tests for spectral domains.

Test Coverage Goals:
- Interval spectrum, traces and boundary choices
- Rectangle spectrum, exact multiplicity groups, boundary quadrature
- Orthonormality and Weyl fit
- Spectral vectors, Sobolev norms, Dirichlet lift and projections
"""

import math

import numpy as np
import pytest

from memory_control.core.exceptions import DomainError
from memory_control.numerics.spectral import (
    SpectralVector,
    dirichlet_lift_coefficients,
    interval_domain,
    project_function,
    rectangle_domain,
    sobolev_norm,
)


# ============================================================================
# Interval Tests
# ============================================================================


class TestIntervalDomain:
    """Test the interval spectrum."""

    def test_eigenvalues(self, interval8):
        np.testing.assert_allclose(interval8.eigenvalues, np.arange(1, 9))
        assert interval8.n_modes == 8
        assert interval8.n_gamma == 2

    def test_eigenvalues_scale_with_length(self):
        domain = interval_domain(2.0, 3)
        np.testing.assert_allclose(domain.eigenvalues, np.arange(1, 4) * math.pi / 2.0)

    def test_exterior_normal_traces(self, interval8):
        n = np.arange(1, 9)
        amplitude = math.sqrt(2.0 / math.pi)
        np.testing.assert_allclose(interval8.traces[:, 0], -amplitude * n)
        np.testing.assert_allclose(interval8.traces[:, 1], amplitude * n * (-1.0) ** n)

    def test_single_end(self):
        left = interval_domain(math.pi, 4, "left")
        right = interval_domain(math.pi, 4, "right")
        assert left.gamma == ("left",)
        assert left.gamma_nodes.tolist() == [0.0]
        assert right.gamma_nodes.tolist() == [math.pi]

    def test_normalized_traces(self, interval8):
        np.testing.assert_allclose(interval8.normalized_traces[:, 0], -math.sqrt(2.0 / math.pi))

    @pytest.mark.parametrize(
        "args",
        [(0.0, 4, "both"), (math.pi, 0, "both"), (math.pi, 4, "middle"), (math.pi, 4, "")],
    )
    def test_invalid_definitions(self, args):
        with pytest.raises(DomainError):
            interval_domain(*args)

    def test_evaluate_shape_and_values(self, interval8):
        values = interval8.evaluate([0.5 * math.pi])
        assert values.shape == (1, 8)
        assert values[0, 0] == pytest.approx(math.sqrt(2.0 / math.pi))
        assert values[0, 1] == pytest.approx(0.0, abs=1e-15)

    def test_orthonormality(self):
        assert interval_domain(math.pi, 32).orthonormality_defect() < 1e-8

    def test_weyl_fit_is_exact_on_interval(self, interval8):
        fit = interval8.weyl_fit()
        assert fit.lower == pytest.approx(1.0)
        assert fit.upper == pytest.approx(1.0)
        assert fit.slope == pytest.approx(1.0)

    def test_eigen_table(self, interval8):
        header, rows = interval8.eigen_table()
        assert header == ["n", "lambda", "trace_0", "trace_1"]
        assert rows.shape == (8, 4)
        assert rows[2, 0] == 3.0

    def test_truncate_and_with_modes(self, interval8):
        assert interval8.truncate(3).n_modes == 3
        grown = interval8.with_modes(16)
        assert grown.n_modes == 16
        assert grown.gamma == interval8.gamma
        np.testing.assert_array_equal(grown.eigenvalues[:8], interval8.eigenvalues)

    def test_truncate_out_of_range(self, interval8):
        with pytest.raises(DomainError):
            interval8.truncate(0)
        with pytest.raises(DomainError):
            interval8.truncate(9)


# ============================================================================
# Rectangle Tests
# ============================================================================


class TestRectangleDomain:
    """Test the rectangle spectrum."""

    def test_square_groups(self):
        square = rectangle_domain(math.pi, math.pi, n_max=6)
        assert square.labels == ((1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1))
        assert square.groups() == [[0], [1, 2], [3], [4, 5]]
        np.testing.assert_allclose(square.eigenvalues, np.sqrt([2.0, 5.0, 5.0, 8.0, 10.0, 10.0]))

    def test_group_eigenvalues_bitwise_equal(self):
        square = rectangle_domain(math.pi, math.pi, n_max=40)
        for group in square.groups():
            assert np.all(square.eigenvalues[group] == square.eigenvalues[group[0]])

    def test_cutoff(self):
        square = rectangle_domain(math.pi, math.pi, lambda_cutoff=math.sqrt(5.0))
        assert square.n_modes == 3

    def test_cutoff_below_ground_raises(self):
        with pytest.raises(DomainError, match="ground eigenvalue"):
            rectangle_domain(math.pi, math.pi, lambda_cutoff=1.0)

    def test_needs_cutoff_or_count(self):
        with pytest.raises(DomainError, match="lambda_cutoff or n_max"):
            rectangle_domain(1.0, 1.0)

    @pytest.mark.parametrize("edges", [(), ("left", "diagonal")])
    def test_invalid_gamma(self, edges):
        with pytest.raises(DomainError, match="Active boundary"):
            rectangle_domain(1.0, 1.0, gamma_edges=edges, n_max=4)

    def test_boundary_quadrature(self):
        rectangle = rectangle_domain(2.0, 1.0, gamma_edges=("left", "bottom"), nodes_per_edge=9, n_max=4)
        assert rectangle.n_gamma == 18
        assert np.sum(rectangle.gamma_weights) == pytest.approx(3.0)

    def test_orthonormality(self):
        assert rectangle_domain(math.pi, 2.0, n_max=20).orthonormality_defect() < 1e-8

    def test_with_modes_rebuilds(self):
        rectangle = rectangle_domain(math.pi, math.pi, gamma_edges=("top",), nodes_per_edge=5, n_max=4)
        grown = rectangle.with_modes(10)
        assert grown.n_modes == 10
        assert grown.gamma == ("top",)
        assert grown.n_gamma == 5

    def test_weyl_lower_positive(self):
        fit = rectangle_domain(math.pi, math.pi, n_max=100).weyl_fit()
        assert 0.0 < fit.lower <= fit.upper


# ============================================================================
# Spectral Vector Tests
# ============================================================================


class TestSpectralVector:
    """Test spectral vectors and norms."""

    def test_shape_mismatch_raises(self):
        with pytest.raises(ValueError, match="does not match"):
            SpectralVector(np.ones(3), np.ones(4))

    def test_non_finite_raises(self):
        with pytest.raises(ValueError, match="finite"):
            SpectralVector(np.array([1.0, np.inf]), np.ones(2))

    def test_sobolev_norms(self, interval8):
        v = interval8.vector([1.0, 1.0])
        assert sobolev_norm(v, 0) == pytest.approx(math.sqrt(2.0))
        assert sobolev_norm(v, 1) == pytest.approx(math.sqrt(5.0))
        assert sobolev_norm(v, -1) == pytest.approx(math.sqrt(1.25))
        assert v.norm(1) == sobolev_norm(v, 1)

    def test_sobolev_index_restricted(self, interval8):
        with pytest.raises(ValueError, match="Sobolev index"):
            sobolev_norm(interval8.zeros(), 2)

    def test_vector_pads_and_rejects_excess(self, interval8):
        v = interval8.vector([2.0])
        assert v.n_modes == 8
        assert v.coefficients[1:].tolist() == [0.0] * 7
        with pytest.raises(DomainError):
            interval8.vector(np.ones(9))

    def test_mode_is_one_based(self, interval8):
        assert interval8.mode(2).coefficients[1] == 1.0

    def test_arithmetic_and_padding(self, interval8):
        v = interval8.mode(1) + interval8.mode(2).scaled(2.0) - interval8.mode(1)
        assert v.coefficients[:2].tolist() == [0.0, 2.0]
        padded = v.truncated(2).padded(interval8.with_modes(16))
        assert padded.n_modes == 16
        assert padded.coefficients[1] == 2.0


# ============================================================================
# Lift and Projection Tests
# ============================================================================


class TestLiftAndProjection:
    """Test the Dirichlet lift and L2 projection."""

    def test_lift_matches_projection(self, interval8):
        lift = dirichlet_lift_coefficients(interval8, np.array([0.0, 1.0]))
        projected = project_function(interval8, lambda x: x / math.pi)
        np.testing.assert_allclose(lift.coefficients, projected.coefficients, atol=1e-10)

    def test_lift_snapshot_shape(self, interval8):
        with pytest.raises(DomainError, match="snapshot"):
            dirichlet_lift_coefficients(interval8, np.array([1.0]))

    def test_projection_of_eigenfunction(self, interval8):
        projected = project_function(interval8, lambda x: math.sqrt(2.0 / math.pi) * np.sin(3.0 * x))
        expected = np.zeros(8)
        expected[2] = 1.0
        np.testing.assert_allclose(projected.coefficients, expected, atol=1e-12)

    def test_projection_on_rectangle(self):
        square = rectangle_domain(math.pi, math.pi, n_max=6)
        projected = project_function(square, lambda x, y: (2.0 / math.pi) * np.sin(x) * np.sin(y))
        assert projected.coefficients[0] == pytest.approx(1.0, abs=1e-10)
        assert np.max(np.abs(projected.coefficients[1:])) < 1e-10
