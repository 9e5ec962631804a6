"""Tests for space-time fields.

Test Coverage Goals:
- Free, adjoint and controlled evolutions against closed forms
- Field evaluation, lattice and trace tables
- Picard kernel (series vs resolvent) and reconstruction
- Duality pairing, direct inequality and trace tails
"""

import math

import numpy as np
import pytest

from memory_control.core.exceptions import SeriesDivergenceError, StabilityError
from memory_control.numerics.field import (
    SystemParams,
    adjoint_evolution,
    boundary_trace,
    control_forcing,
    controlled_evolution,
    direct_inequality_ratio,
    duality_gap,
    free_evolution,
    picard_H_kernel,
    picard_reconstruction,
    random_finite_energy_data,
    trace_basis,
)
from memory_control.numerics.kernels import SampledKernel, TimeGrid
from memory_control.numerics.signals import ControlSignal
from memory_control.numerics.spectral import interval_domain


def boundary_control(domain, grid, samples):
    return ControlSignal.from_samples(grid, domain.gamma_nodes, domain.gamma_weights, samples)


# ============================================================================
# Evolution Tests
# ============================================================================


class TestEvolutions:
    """Test free, adjoint and controlled solves."""

    def test_free_wave_first_mode(self, interval8, wave_params, short_grid):
        solution = free_evolution(interval8, wave_params, interval8.mode(1))
        np.testing.assert_allclose(solution.displacement[0], np.cos(short_grid.nodes), atol=1e-4)
        assert np.all(solution.displacement[1:] == 0.0)
        assert solution.n_modes == 8

    def test_adjoint_is_unit_velocity_solution(self, interval8, wave_params, short_grid):
        adjoint = adjoint_evolution(interval8, wave_params, interval8.mode(2))
        np.testing.assert_allclose(adjoint.displacement[1], np.sin(2.0 * short_grid.nodes) / 2.0, atol=1e-4)

    def test_controlled_duhamel(self, interval8, wave_params, short_grid):
        samples = np.vstack([np.ones(short_grid.size), np.zeros(short_grid.size)])
        solution = controlled_evolution(interval8, wave_params, boundary_control(interval8, short_grid, samples), 1)
        expected = math.sqrt(2.0 / math.pi) * (1.0 - np.cos(short_grid.nodes))
        np.testing.assert_allclose(solution.displacement[0], expected, atol=1e-4)

    def test_threads_do_not_change_results(self, interval8, memory_params):
        w0 = interval8.vector(1.0 / np.arange(1, 9))
        serial = free_evolution(interval8, memory_params, w0, threads=1)
        threaded = free_evolution(interval8, memory_params, w0, threads=4)
        np.testing.assert_array_equal(serial.displacement, threaded.displacement)

    def test_cfl_violation_raises(self, short_grid):
        domain = interval_domain(math.pi, 300)
        with pytest.raises(StabilityError):
            free_evolution(domain, SystemParams.wave(short_grid), domain.mode(1))

    def test_too_many_modes_raises(self, interval8, wave_params):
        with pytest.raises(ValueError, match="modes"):
            free_evolution(interval8, wave_params, interval8.mode(1), n_modes=9)

    def test_control_gamma_mismatch(self, interval8, short_grid):
        left = interval_domain(math.pi, 8, "left")
        control = ControlSignal.zeros(short_grid, left.gamma_nodes, left.gamma_weights)
        with pytest.raises(ValueError, match="Gamma nodes"):
            control_forcing(interval8, control, 8)

    def test_terminal_state_uses_solved_modes(self, interval8, wave_params):
        solution = free_evolution(interval8, wave_params, interval8.mode(1), n_modes=3)
        assert solution.terminal_state.n_modes == 3


# ============================================================================
# Field Table Tests
# ============================================================================


class TestFieldTables:
    """Test field evaluation and exported tables."""

    def test_evaluate_midpoint(self, interval8, wave_params, short_grid):
        solution = free_evolution(interval8, wave_params, interval8.mode(1))
        values = solution.evaluate(np.array([0.5 * math.pi]))
        np.testing.assert_allclose(values[0], math.sqrt(2.0 / math.pi) * np.cos(short_grid.nodes), atol=1e-4)

    def test_lattice_table(self, interval8, wave_params, short_grid):
        solution = free_evolution(interval8, wave_params, interval8.mode(1))
        header, rows = solution.lattice_table(np.linspace(0.0, math.pi, 3), time_stride=50)
        assert header == ["x", "t", "w"]
        assert rows.shape == (3 * 5, 3)
        assert np.all(rows[rows[:, 0] == 0.0, 2] == 0.0)

    def test_trace_table(self, interval8, wave_params, short_grid):
        solution = free_evolution(interval8, wave_params, interval8.mode(1))
        header, rows = solution.trace_table()
        assert header == ["t", "trace_0", "trace_1"]
        assert rows.shape == (short_grid.size, 3)
        np.testing.assert_allclose(rows[:, 1], interval8.traces[0, 0] * solution.displacement[0])


# ============================================================================
# Picard Kernel Tests
# ============================================================================


class TestPicard:
    """Test the Picard kernel and reconstruction."""

    def test_series_matches_resolvent(self, memory_params):
        picard = picard_H_kernel(memory_params, 2.0)
        assert picard.agreement < 1e-8
        assert picard.terms > 1

    def test_shifted_wave_series(self, short_grid):
        picard = picard_H_kernel(SystemParams(1.0, SampledKernel.zeros(short_grid)), 3.0)
        assert picard.agreement < 1e-8

    def test_kernel_is_real(self, memory_params):
        picard = picard_H_kernel(memory_params, 2.0)
        assert np.max(np.abs(picard.kernel.values.imag)) < 1e-14
        assert np.max(np.abs(picard.resolvent_path.values.imag)) < 1e-14

    def test_truncated_series_raises(self, memory_params):
        with pytest.raises(SeriesDivergenceError, match="did not decay"):
            picard_H_kernel(memory_params, 1.0, k_max=2)

    def test_requires_zero_velocity(self, short_grid):
        params = SystemParams(0.0, SampledKernel.zeros(short_grid), velocity=1.0)
        with pytest.raises(ValueError, match="zero velocity"):
            picard_H_kernel(params, 1.0)

    def test_free_reconstruction(self):
        grid = TimeGrid(2.0, 1000)
        domain = interval_domain(math.pi, 4)
        params = SystemParams(0.0, SampledKernel(grid, np.exp(-grid.nodes)))
        report = picard_reconstruction(domain, params, domain.vector([1.0, 0.5]), domain.vector([0.0, 1.0]), n_modes=4)
        assert report.max_deviation < 1e-3
        assert report.max_imaginary < 1e-8
        assert len(report.terms) == 4

    def test_controlled_reconstruction(self):
        grid = TimeGrid(2.0, 1000)
        domain = interval_domain(math.pi, 4)
        params = SystemParams(0.0, SampledKernel(grid, np.exp(-grid.nodes)))
        t = grid.nodes
        control = boundary_control(domain, grid, np.vstack([np.sin(t), 0.5 * t * (2.0 - t)]))
        report = picard_reconstruction(domain, params, control=control, n_modes=4)
        assert report.max_deviation < 1e-3


# ============================================================================
# Duality and Trace Tests
# ============================================================================


class TestDuality:
    """Test the discrete duality pairing."""

    @pytest.mark.parametrize("with_memory", [False, True])
    def test_pairing_is_exact(self, interval8, short_grid, exp_kernel, with_memory):
        params = SystemParams(0.0, exp_kernel if with_memory else SampledKernel.zeros(short_grid))
        rng = np.random.default_rng(11)
        control = boundary_control(interval8, short_grid, rng.standard_normal((2, short_grid.size)))
        xi0 = interval8.vector(rng.standard_normal(8) / np.arange(1, 9))
        check = duality_gap(interval8, params, control, xi0, 8)
        assert check.relative_error < 1e-9
        assert check.lhs == pytest.approx(check.rhs, rel=1e-8)


class TestTraces:
    """Test boundary traces and the direct inequality."""

    def test_single_mode_ratio_is_two(self):
        grid = TimeGrid(math.pi, 1000)
        single = interval_domain(math.pi, 1)
        estimate = direct_inequality_ratio(single, SystemParams.wave(grid), [(single.zeros(), single.mode(1))])
        assert estimate.max_ratio == pytest.approx(2.0, rel=1e-3)

    def test_ratio_uses_precomputed_basis(self, interval8, memory_params):
        samples = random_finite_energy_data(interval8, 3, seed=5)
        basis = trace_basis(interval8, memory_params)
        direct = direct_inequality_ratio(interval8, memory_params, samples)
        cached = direct_inequality_ratio(interval8, memory_params, samples, basis)
        np.testing.assert_allclose(direct.ratios, cached.ratios)
        assert direct.n_modes == 8

    def test_zero_data_rejected(self, interval8, wave_params):
        with pytest.raises(ValueError, match="nonzero"):
            direct_inequality_ratio(interval8, wave_params, [(interval8.zeros(), interval8.zeros())])

    def test_random_data_shares_leading_coefficients(self, interval8):
        full = random_finite_energy_data(interval8, 2, seed=9)
        short = random_finite_energy_data(interval8.truncate(4), 2, seed=9)
        for (w0_full, w1_full), (w0_short, w1_short) in zip(full, short):
            np.testing.assert_array_equal(w0_full.coefficients[:4], w0_short.coefficients)
            np.testing.assert_array_equal(w1_full.coefficients[:4], w1_short.coefficients)

    def test_random_data_is_seeded(self, interval8):
        a = random_finite_energy_data(interval8, 1, seed=1)[0][0].coefficients
        b = random_finite_energy_data(interval8, 1, seed=1)[0][0].coefficients
        c = random_finite_energy_data(interval8, 1, seed=2)[0][0].coefficients
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_boundary_trace_tail(self, interval8, wave_params):
        w0 = interval8.vector(1.0 / np.arange(1, 9) ** 2)
        solution = free_evolution(interval8, wave_params, w0)
        full = boundary_trace(solution)
        assert full.truncation == 8
        assert full.tail > 0.0
        assert boundary_trace(solution, 1).tail == 0.0

    def test_boundary_trace_range(self, interval8, wave_params):
        solution = free_evolution(interval8, wave_params, interval8.mode(1))
        with pytest.raises(ValueError, match="Truncation"):
            boundary_trace(solution, 9)
