"""Shared pytest fixtures for memory control tests.

This module provides reusable test fixtures that can be used across all test files.
Fixtures are automatically discovered by pytest and can be used as function arguments.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pytest

from memory_control.core.models import ExperimentConfig
from memory_control.numerics.field import SystemParams
from memory_control.numerics.kernels import ClosedForm, SampledKernel, TimeGrid
from memory_control.numerics.spectral import SpectralDomain, interval_domain
from memory_control.storage.cache import SystemCache
from memory_control.storage.filesystem import FileSystemStorage


# ============================================================================
# Grid and Kernel Fixtures
# ============================================================================


@pytest.fixture
def short_grid() -> TimeGrid:
    """Grid on (0, 2) with dt = 0.01."""
    return TimeGrid(2.0, 200)


@pytest.fixture
def period_grid() -> TimeGrid:
    """Grid on (0, 2 pi) with 2000 steps."""
    return TimeGrid(2.0 * math.pi, 2000)


@pytest.fixture
def exp_kernel(short_grid: TimeGrid) -> SampledKernel:
    """K(t) = exp(-t) on the short grid."""
    return SampledKernel.from_closed_form(ClosedForm("exponential", {"c": 1.0, "rate": 1.0}), short_grid)


# ============================================================================
# Domain and System Fixtures
# ============================================================================


@pytest.fixture
def interval8() -> SpectralDomain:
    """Interval (0, pi) with 8 modes, controlled at both ends."""
    return interval_domain(math.pi, 8, "both")


@pytest.fixture
def wave_params(short_grid: TimeGrid) -> SystemParams:
    """Pure wave coefficients on the short grid."""
    return SystemParams.wave(short_grid)


@pytest.fixture
def memory_params(exp_kernel: SampledKernel) -> SystemParams:
    """b = 0 with K = exp(-t) on the short grid."""
    return SystemParams(0.0, exp_kernel)


# ============================================================================
# Configuration Fixtures
# ============================================================================


@pytest.fixture
def simulate_dict() -> Dict[str, Any]:
    """Small simulate configuration (4 modes, T = 1, dt = 0.01)."""
    return {
        "experiment": {"kind": "simulate", "seed": 7},
        "domain": {"kind": "interval", "n_max": 8, "gamma": ["both"]},
        "kernel": {"family": "exponential", "c": 1.0, "rate": 1.0},
        "grid": {"horizon": 1.0, "dt": 0.01},
        "control": {"n_modes": 4, "initial": [1.0, 0.5]},
        "output": {"field_points": 5, "time_stride": 10},
    }


@pytest.fixture
def simulate_config(simulate_dict: Dict[str, Any]) -> ExperimentConfig:
    return ExperimentConfig.from_dict(simulate_dict)


@pytest.fixture
def simulate_json(tmp_path: Path, simulate_dict: Dict[str, Any]) -> Path:
    """Simulate configuration written as JSON."""
    path = tmp_path / "simulate.json"
    path.write_text(json.dumps(simulate_dict))
    return path


@pytest.fixture
def simulate_ini(tmp_path: Path) -> Path:
    """Simulate configuration written as INI."""
    path = tmp_path / "simulate.ini"
    path.write_text(
        "[experiment]\n"
        "kind = simulate\n"
        "seed = 7\n"
        "\n"
        "[domain]\n"
        "kind = interval\n"
        "n_max = 8\n"
        "gamma = both\n"
        "\n"
        "[kernel]\n"
        "family = exponential\n"
        "c = 1.0\n"
        "rate = 1.0\n"
        "\n"
        "[grid]\n"
        "horizon = 1.0\n"
        "dt = 0.01\n"
        "\n"
        "[control]\n"
        "n_modes = 4\n"
        "initial = 1.0, 0.5\n"
        "regularization = none\n"
        "\n"
        "[output]\n"
        "field_points = 5\n"
        "time_stride = 10\n"
    )
    return path


@pytest.fixture
def kernel_csv(tmp_path: Path) -> Path:
    """exp(-t) sampled on (0, 2) with 201 rows."""
    path = tmp_path / "kernel.csv"
    t = np.linspace(0.0, 2.0, 201)
    np.savetxt(path, np.column_stack([t, np.exp(-t)]), delimiter=",", header="t,value", comments="", fmt="%.17g")
    return path


# ============================================================================
# Storage Fixtures
# ============================================================================


@pytest.fixture
def temp_storage(tmp_path: Path) -> FileSystemStorage:
    """Filesystem storage in a temporary directory."""
    return FileSystemStorage(tmp_path / "runs")


@pytest.fixture
def temp_cache(tmp_path: Path) -> SystemCache:
    """System cache in a temporary directory."""
    return SystemCache(tmp_path / "cache")
