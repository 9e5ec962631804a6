"""Tests for time grids and sampled kernels.

Test Coverage Goals:
- TimeGrid construction, step rounding, weights and refinement
- Closed-form families and their exact derivatives
- SampledKernel validation, immutability, tables and resampling
- Kernel arithmetic on matching and mismatching grids
"""

import math

import numpy as np
import pytest

from memory_control.core.exceptions import GridMismatchError, KernelError
from memory_control.numerics.kernels import ClosedForm, SampledKernel, TimeGrid


# ============================================================================
# TimeGrid Tests
# ============================================================================


class TestTimeGrid:
    """Test uniform time grids."""

    def test_step_and_size(self):
        grid = TimeGrid(2.0, 200)
        assert grid.dt == pytest.approx(0.01)
        assert grid.size == 201
        assert grid.nodes[-1] == pytest.approx(2.0)

    def test_from_step_keeps_horizon_as_node(self):
        grid = TimeGrid.from_step(1.0, 0.3)
        assert grid.n_steps == 3
        assert grid.nodes[-1] == pytest.approx(1.0)

    def test_from_step_rejects_nonpositive_step(self):
        with pytest.raises(ValueError, match="positive"):
            TimeGrid.from_step(1.0, 0.0)

    def test_rejects_single_step(self):
        with pytest.raises(ValueError, match="at least 2 steps"):
            TimeGrid(1.0, 1)

    def test_rejects_nonpositive_horizon(self):
        with pytest.raises(ValueError, match="horizon"):
            TimeGrid(-1.0, 10)

    def test_trapezoid_weights_integrate_constants(self, short_grid):
        assert np.sum(short_grid.trapezoid_weights) == pytest.approx(short_grid.t_end)
        assert short_grid.trapezoid_weights[0] == pytest.approx(0.5 * short_grid.dt)

    def test_nodes_are_read_only(self, short_grid):
        with pytest.raises(ValueError):
            short_grid.nodes[0] = 1.0

    def test_refined_doubles_steps(self, short_grid):
        fine = short_grid.refined(2)
        assert fine.n_steps == 400
        assert fine.t_end == short_grid.t_end

    def test_require_same_raises_on_mismatch(self, short_grid):
        with pytest.raises(GridMismatchError, match="test context"):
            short_grid.require_same(short_grid.refined(2), "test context")

    def test_equal_grids_compare_equal(self):
        assert TimeGrid(1.0, 10) == TimeGrid(1.0, 10)


# ============================================================================
# Closed Form Tests
# ============================================================================


class TestClosedForm:
    """Test closed-form kernel families."""

    def test_unknown_family_raises(self):
        with pytest.raises(KernelError, match="Unknown kernel family"):
            ClosedForm("gaussian")

    def test_exponential_derivatives(self):
        kernel = ClosedForm("exponential", {"c": 2.0, "rate": 3.0})
        t = np.array([0.0, 0.5])
        np.testing.assert_allclose(kernel.evaluate(t), 2.0 * np.exp(-3.0 * t))
        np.testing.assert_allclose(kernel.evaluate(t, 1), -6.0 * np.exp(-3.0 * t))
        np.testing.assert_allclose(kernel.evaluate(t, 2), 18.0 * np.exp(-3.0 * t))

    def test_polynomial_derivatives(self):
        kernel = ClosedForm("polynomial", {"coefficients": [1.0, 2.0, 3.0]})
        assert kernel.evaluate([2.0])[0] == pytest.approx(17.0)
        assert kernel.evaluate([2.0], 1)[0] == pytest.approx(14.0)
        assert kernel.evaluate([2.0], 2)[0] == pytest.approx(6.0)
        assert kernel.evaluate([2.0], 3)[0] == pytest.approx(0.0)

    def test_sine_derivative_is_cosine(self):
        kernel = ClosedForm("sine", {"amplitude": 1.5, "frequency": 2.0})
        t = np.linspace(0.0, 1.0, 5)
        np.testing.assert_allclose(kernel.evaluate(t, 1), 3.0 * np.cos(2.0 * t), atol=1e-14)

    def test_constant_derivative_vanishes(self):
        kernel = ClosedForm("constant", {"c": 4.0})
        assert np.all(kernel.evaluate([0.0, 1.0], 1) == 0.0)

    def test_negative_derivative_rejected(self):
        with pytest.raises(ValueError):
            ClosedForm("zero").evaluate([0.0], -1)

    def test_describe(self):
        assert ClosedForm("exponential", {"rate": 1.0, "c": 2.0}).describe() == "exponential(c=2.0, rate=1.0)"


# ============================================================================
# SampledKernel Tests
# ============================================================================


class TestSampledKernel:
    """Test sampled kernels."""

    def test_from_closed_form(self, short_grid):
        kernel = SampledKernel.from_closed_form(ClosedForm("exponential"), short_grid)
        np.testing.assert_allclose(kernel.values, np.exp(-short_grid.nodes))
        assert kernel.closed_form is not None

    def test_wrong_shape_raises(self, short_grid):
        with pytest.raises(KernelError, match="shape"):
            SampledKernel(short_grid, np.zeros(5))

    def test_non_finite_raises(self, short_grid):
        values = np.zeros(short_grid.size)
        values[3] = np.nan
        with pytest.raises(KernelError, match="non-finite"):
            SampledKernel(short_grid, values)

    def test_values_are_copied_and_read_only(self, short_grid):
        values = np.ones(short_grid.size)
        kernel = SampledKernel(short_grid, values)
        values[0] = 5.0
        assert kernel.values[0] == 1.0
        with pytest.raises(ValueError):
            kernel.values[0] = 2.0

    def test_complex_values_are_kept(self, short_grid):
        kernel = SampledKernel(short_grid, 1j * np.ones(short_grid.size))
        assert kernel.is_complex
        assert not kernel.real.is_complex

    def test_zeros(self, short_grid):
        assert SampledKernel.zeros(short_grid).is_zero

    def test_derivative_requires_closed_form(self, short_grid):
        kernel = SampledKernel(short_grid, np.ones(short_grid.size), label="table")
        with pytest.raises(KernelError, match="no closed form"):
            kernel.derivative()

    def test_exact_derivative(self, exp_kernel, short_grid):
        np.testing.assert_allclose(exp_kernel.derivative(1).values, -np.exp(-short_grid.nodes))

    def test_from_columns_round_trip(self, short_grid, exp_kernel):
        t, values = exp_kernel.to_columns()
        rebuilt = SampledKernel.from_columns(t, values)
        assert rebuilt.grid.n_steps == short_grid.n_steps
        assert rebuilt.grid.t_end == pytest.approx(short_grid.t_end)
        np.testing.assert_array_equal(rebuilt.values, exp_kernel.values)

    def test_from_columns_rejects_offset_start(self):
        with pytest.raises(KernelError, match="t = 0"):
            SampledKernel.from_columns([0.1, 0.2, 0.3], [1.0, 1.0, 1.0])

    def test_from_columns_rejects_nonuniform(self):
        with pytest.raises(KernelError, match="uniform"):
            SampledKernel.from_columns([0.0, 0.1, 0.3, 0.4], [1.0, 1.0, 1.0, 1.0])

    def test_from_columns_rejects_short_table(self):
        with pytest.raises(KernelError, match="three rows"):
            SampledKernel.from_columns([0.0, 0.1], [1.0, 1.0])

    def test_resampled_closed_form_is_exact(self, exp_kernel, short_grid):
        fine = short_grid.refined(2)
        resampled = exp_kernel.resampled(fine)
        np.testing.assert_allclose(resampled.values, np.exp(-fine.nodes))

    def test_resampled_table_by_spline(self, short_grid):
        table = SampledKernel(short_grid, np.exp(-short_grid.nodes))
        fine = short_grid.refined(2)
        assert np.max(np.abs(table.resampled(fine).values - np.exp(-fine.nodes))) < 1e-6

    def test_resampled_table_cannot_extend(self, short_grid):
        table = SampledKernel(short_grid, np.ones(short_grid.size))
        with pytest.raises(KernelError, match="beyond"):
            table.resampled(TimeGrid(4.0, 400))

    def test_arithmetic(self, exp_kernel):
        doubled = exp_kernel + exp_kernel
        np.testing.assert_allclose(doubled.values, 2.0 * exp_kernel.values)
        assert (exp_kernel - exp_kernel).is_zero
        np.testing.assert_array_equal((-exp_kernel).values, -exp_kernel.values)

    def test_arithmetic_on_different_grids_raises(self, exp_kernel, short_grid):
        other = SampledKernel.zeros(short_grid.refined(2))
        with pytest.raises(GridMismatchError):
            exp_kernel + other

    def test_sup_norm(self, exp_kernel):
        assert exp_kernel.sup_norm() == pytest.approx(1.0)

    def test_scaled(self, exp_kernel):
        assert exp_kernel.scaled(3.0).values[0] == pytest.approx(3.0)
        assert math.isclose(exp_kernel.scaled(1j).values[0].imag, 1.0)
