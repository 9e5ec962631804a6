"""
Memory Control Library.

Spectral solver and boundary-control synthesizer for the wave equation with memory
w'' = Delta w + b w + K*w on an interval or a rectangle, with Dirichlet controls on
part of the boundary. First-order memory equations are reduced to this form by the
MacCamy transform.

CLI Usage:
    python -m memory_control list
    python -m memory_control run --config experiment.ini
    python -m memory_control check steer-wave --check

Library Usage (Simple):
    from memory_control import run_experiment, run_named_experiment
    result = run_experiment("experiment.ini", output_dir="runs")
    result = run_named_experiment("maccamy-equivalence")

Library Usage (Advanced):
    from memory_control import ExperimentRunner, ExperimentConfig, FileSystemStorage
    config = ExperimentConfig.from_file("experiment.ini")
    runner = ExperimentRunner(storage=FileSystemStorage("runs"))
    result = runner.run(config)
"""

__version__ = "1.0.0"

# Simple API (convenience functions)
from memory_control.api import run_experiment, run_named_experiment

# Advanced API (direct class access)
from memory_control.core.catalog import list_experiments
from memory_control.core.runner import ExperimentRunner
from memory_control.core.models import ExperimentConfig
from memory_control.core.validator import ExperimentValidator
from memory_control.core.exceptions import (
    MemoryControlError,
    ValidationError,
    StabilityError,
    ControllabilityError,
    ExperimentError,
    StorageError,
    CacheError,
)

# Storage interfaces
from memory_control.storage.base import Storage
from memory_control.storage.filesystem import FileSystemStorage
from memory_control.storage.cache import SystemCache

# Results
from memory_control.core.results import ExperimentResult, ValidationResult, CheckOutcome

__all__ = [
    # Simple API
    "run_experiment",
    "run_named_experiment",
    "list_experiments",
    # Core
    "ExperimentRunner",
    "ExperimentConfig",
    "ExperimentValidator",
    # Storage
    "Storage",
    "FileSystemStorage",
    "SystemCache",
    # Results
    "ExperimentResult",
    "ValidationResult",
    "CheckOutcome",
    # Exceptions
    "MemoryControlError",
    "ValidationError",
    "StabilityError",
    "ControllabilityError",
    "ExperimentError",
    "StorageError",
    "CacheError",
]
