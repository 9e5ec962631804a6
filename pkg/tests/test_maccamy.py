"""Tests for the MacCamy transform.

Test Coverage Goals:
- Resolvent of N' for closed-form memory kernels
- Transformed constants for N = 0, N = t, N = exp(-t)
- Direct first-order solve against the transformed solve
- Affine data map linearity, scaling consistency, records and regridding
"""

import math

import numpy as np
import pytest

from memory_control.core.exceptions import TransformError
from memory_control.numerics.kernels import ClosedForm, SampledKernel, TimeGrid
from memory_control.numerics.maccamy import (
    FirstOrderProblem,
    SecondOrderSystem,
    differentiate_memory_equation,
    equivalence_check,
    kernel_from_closed_form,
    maccamy_transform,
    scaling_consistency,
    solve_first_order_mode,
)
from memory_control.numerics.spectral import interval_domain


def problem(alpha: float, family: str, params=None, grid: TimeGrid = TimeGrid(2.0, 200)) -> FirstOrderProblem:
    return FirstOrderProblem(alpha, kernel_from_closed_form(family, params or {}, grid))


# ============================================================================
# Memory Resolvent Tests
# ============================================================================


class TestMemoryResolvent:
    """Test the resolvent of N'."""

    def test_linear_memory_gives_exponential(self, short_grid):
        result = differentiate_memory_equation(problem(0.0, "polynomial", {"coefficients": [0.0, 1.0]}))
        np.testing.assert_allclose(result.resolvent.values, np.exp(-short_grid.nodes), atol=1e-4)
        assert result.defect < 1e-10

    def test_quadratic_memory_gives_sine(self, short_grid):
        result = differentiate_memory_equation(problem(0.0, "polynomial", {"coefficients": [0.0, 0.0, 0.5]}))
        np.testing.assert_allclose(result.resolvent.values, np.sin(short_grid.nodes), atol=2e-4)

    def test_zero_memory(self):
        assert differentiate_memory_equation(problem(1.0, "zero")).resolvent.is_zero

    def test_table_kernel_rejected(self, short_grid):
        table = FirstOrderProblem(0.0, SampledKernel(short_grid, np.exp(-short_grid.nodes), label="table"))
        with pytest.raises(TransformError, match="closed-form derivatives"):
            differentiate_memory_equation(table)

    def test_relaxation_kernel(self, short_grid):
        G = problem(0.0, "exponential").relaxation_kernel()
        np.testing.assert_allclose(G.values, np.exp(-short_grid.nodes))


# ============================================================================
# Transform Constant Tests
# ============================================================================


class TestTransformConstants:
    """Test the constants of the second-order system."""

    @pytest.mark.parametrize("alpha", [0.0, 0.5, -1.0])
    def test_no_memory(self, alpha):
        system = maccamy_transform(problem(alpha, "zero"))
        assert system.a == pytest.approx(2.0 * alpha)
        assert system.b_pre == pytest.approx(0.0)
        assert system.b == pytest.approx(alpha * alpha)
        assert system.kernel.is_zero

    def test_linear_memory(self, short_grid):
        system = maccamy_transform(problem(0.0, "polynomial", {"coefficients": [0.0, 1.0]}))
        assert system.a == pytest.approx(1.0, abs=1e-12)
        assert system.b_pre == pytest.approx(-1.0, abs=1e-12)
        assert system.b == pytest.approx(-0.75, abs=1e-12)
        np.testing.assert_allclose(system.kernel_pre.values, np.exp(-short_grid.nodes), atol=1e-4)

    def test_exponential_memory(self):
        system = maccamy_transform(problem(0.5, "exponential"))
        assert system.a == pytest.approx(0.0, abs=1e-12)
        assert system.b_pre == pytest.approx(1.0, abs=1e-12)
        assert system.b == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(system.resolvent.values, -1.0, atol=1e-4)

    def test_table_kernel_rejected(self, short_grid):
        table = FirstOrderProblem(0.0, SampledKernel(short_grid, np.ones(short_grid.size), label="table"))
        with pytest.raises(TransformError, match="no closed form"):
            maccamy_transform(table)

    def test_params_views(self):
        system = maccamy_transform(problem(0.25, "exponential"))
        assert system.params.velocity == 0.0
        assert system.params.b == system.b
        assert system.pre_scaling_params.velocity == system.a
        assert system.scale_rate == pytest.approx(0.5 * system.a)


# ============================================================================
# Equivalence Tests
# ============================================================================


class TestEquivalence:
    """Test the direct and transformed solves against each other."""

    def test_direct_solve_without_memory_is_cosine(self, short_grid):
        trajectory = solve_first_order_mode(problem(0.0, "zero"), 1.0, 1.0)
        np.testing.assert_allclose(trajectory.psi, np.cos(short_grid.nodes), atol=5e-4)
        assert trajectory.method == "direct"

    def test_transformed_matches_direct(self):
        domain = interval_domain(math.pi, 4)
        first_order = problem(0.25, "exponential", grid=TimeGrid(1.0, 200))
        system = maccamy_transform(first_order)
        deviation = equivalence_check(first_order, system, domain, [1.0, 0.5, 0.25, 0.125], 4)
        assert deviation < 5e-3

    def test_deviation_shrinks_with_refinement(self):
        domain = interval_domain(math.pi, 2)
        first_order = problem(0.25, "exponential", grid=TimeGrid(1.0, 100))
        system = maccamy_transform(first_order)
        coarse = equivalence_check(first_order, system, domain, [1.0, 0.5], 2)
        fine = equivalence_check(first_order, system, domain, [1.0, 0.5], 2, grid=TimeGrid(1.0, 400))
        assert fine < coarse

    def test_scaling_consistency(self):
        domain = interval_domain(math.pi, 3)
        first_order = problem(0.25, "exponential", grid=TimeGrid(1.0, 200))
        system = maccamy_transform(first_order)
        assert scaling_consistency(first_order, system, domain, [1.0, 0.5, 0.25], 3) < 1e-3


# ============================================================================
# Data Map and Record Tests
# ============================================================================


class TestDataMaps:
    """Test the affine data map, scaling and persistence helpers."""

    def test_affine_map_is_linear(self):
        system = maccamy_transform(problem(0.5, "exponential", {"c": 2.0, "rate": 1.0}))
        a = system.affine_map(np.array([1.0, 0.0]), np.array([0.0, 2.0]))
        b = system.affine_map(np.array([0.0, 3.0]), np.array([1.0, 0.0]))
        both = system.affine_map(np.array([1.0, 3.0]), np.array([1.0, 2.0]))
        np.testing.assert_allclose(both, a + b, atol=1e-12)

    def test_affine_map_includes_forcing(self, short_grid):
        system = maccamy_transform(problem(0.0, "zero"))
        forcing = np.ones((1, short_grid.size))
        np.testing.assert_allclose(system.affine_map(np.zeros(1), np.zeros(1), forcing), forcing)

    def test_initial_data_shift(self):
        system = maccamy_transform(problem(1.0, "zero"))
        v0, v1 = system.initial_data(np.array([2.0]), np.array([3.0]))
        assert v0.tolist() == [2.0]
        assert v1.tolist() == [pytest.approx(3.0 - 1.0 * 2.0)]

    def test_unscale_inverts_scaling(self):
        system = maccamy_transform(problem(0.5, "zero"))
        values = np.ones(system.grid.size)
        np.testing.assert_allclose(system.unscale(values * system.scaling(-1.0)), values)

    def test_record_round_trip(self):
        system = maccamy_transform(problem(0.5, "exponential"))
        constants, kernels = system.to_record()
        loaded = SecondOrderSystem.from_record(constants, kernels)
        assert loaded.a == system.a
        assert loaded.b == system.b
        np.testing.assert_array_equal(loaded.kernel.values, system.kernel.values)
        assert loaded.problem is None

    def test_incomplete_record(self):
        constants, kernels = maccamy_transform(problem(0.5, "exponential")).to_record()
        del kernels["resolvent"]
        with pytest.raises(TransformError, match="resolvent"):
            SecondOrderSystem.from_record(constants, kernels)

    def test_loaded_record_cannot_regrid(self):
        constants, kernels = maccamy_transform(problem(0.5, "exponential")).to_record()
        loaded = SecondOrderSystem.from_record(constants, kernels)
        assert loaded.on_grid(loaded.grid) is loaded
        with pytest.raises(TransformError, match="re-derive"):
            loaded.on_grid(loaded.grid.refined(2))

    def test_regrid_rederives(self):
        system = maccamy_transform(problem(0.5, "exponential"))
        fine = system.on_grid(system.grid.refined(2))
        assert fine.grid.n_steps == 400
        assert fine.a == pytest.approx(system.a, abs=1e-10)

    def test_forcing_model_shape(self):
        system = maccamy_transform(problem(0.5, "exponential"))
        model = system.forcing_model(np.array([1.0, 2.0]), None)
        grid = TimeGrid(2.0, 100)
        assert model(grid, 3).shape == (3, grid.size)

    def test_kernel_from_closed_form(self, short_grid):
        kernel = kernel_from_closed_form("constant", {"c": 2.0}, short_grid)
        assert kernel.closed_form == ClosedForm("constant", {"c": 2.0})
        assert np.all(kernel.values == 2.0)
