"""Simple convenience API for common use cases.

Test Coverage: tests/test_api.py
- Config-file runs and named runs
- Environment defaults (output directory, threads, cache directory)
- Cache disabling
- Error propagation (missing file, invalid config, unknown name)
"""

import logging
import os
from pathlib import Path
from typing import Optional, Union

from dotenv import load_dotenv

from memory_control.core.models import ExperimentConfig
from memory_control.core.results import ExperimentResult
from memory_control.core.runner import ExperimentRunner
from memory_control.storage.cache import SystemCache
from memory_control.storage.filesystem import FileSystemStorage


logger = logging.getLogger(__name__)


ENV_OUTPUT_DIR = "MEMORY_CONTROL_OUTPUT_DIR"
ENV_THREADS = "MEMORY_CONTROL_THREADS"
ENV_CACHE_DIR = "MEMORY_CONTROL_CACHE_DIR"
DEFAULT_CACHE_DIR = ".memory_cache"


def _env_threads() -> Optional[int]:
    raw = os.getenv(ENV_THREADS)
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError as e:
        raise ValueError(f"{ENV_THREADS} must be an integer, got '{raw}'") from e


def execute_config(
    config: ExperimentConfig,
    output_dir: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    cache_dir: Optional[Union[str, Path]] = DEFAULT_CACHE_DIR,
    verbose: bool = False,
    dt: Optional[float] = None,
) -> ExperimentResult:
    """
    Run an already loaded configuration with overrides and environment defaults.

    Explicit arguments win over environment variables, which win over the config file.
    ``cache_dir=None`` disables the system cache.
    """
    load_dotenv()

    output_dir = output_dir or os.getenv(ENV_OUTPUT_DIR)
    threads = threads if threads is not None else _env_threads()
    if cache_dir is not None and str(cache_dir) == DEFAULT_CACHE_DIR:
        cache_dir = os.getenv(ENV_CACHE_DIR) or DEFAULT_CACHE_DIR

    config = config.with_overrides(
        seed=seed, threads=threads, output_dir=str(output_dir) if output_dir is not None else None, dt=dt
    )

    storage = FileSystemStorage(config.output.directory)
    cache = SystemCache(Path(cache_dir)) if cache_dir else None
    runner = ExperimentRunner(storage=storage, cache=cache, verbose=verbose)

    logger.info(f"Running '{config.run_name}' (seed={config.experiment.seed}, threads={config.experiment.threads})")
    return runner.run(config)


def run_experiment(
    config_path: Union[str, Path],
    output_dir: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    cache_dir: Optional[Union[str, Path]] = DEFAULT_CACHE_DIR,
    verbose: bool = False,
) -> ExperimentResult:
    """
    Run the experiment described by an INI or JSON configuration file.

    This is the simplest way to use the library. For advanced usage,
    instantiate ExperimentRunner directly.

    Args:
        config_path: Path to the .ini/.cfg/.json configuration
        output_dir: Parent directory of run folders (default: MEMORY_CONTROL_OUTPUT_DIR or the config's)
        seed: Seed override for numpy.random.default_rng
        threads: Worker threads for mode sweeps (default: MEMORY_CONTROL_THREADS or the config's)
        cache_dir: System cache directory, or None to disable (default: MEMORY_CONTROL_CACHE_DIR or ".memory_cache")
        verbose: Enable verbose logging (default: False)

    Returns:
        ExperimentResult with output paths and check verdicts

    Raises:
        FileNotFoundError: If the configuration file is missing
        ValidationError: If the schema or business rules are violated (nothing is written)
        MemoryControlError: If a solver step fails (stability, rank deficiency, ...)

    Example:
        >>> from memory_control import run_experiment
        >>> result = run_experiment("configs/steer_wave.ini")
        >>> print(result.passed)
        True
    """
    if verbose:
        logging.basicConfig(level=logging.INFO, format="%(asctime)s [%(levelname)s] %(message)s")

    logger.info(f"Loading experiment configuration from {config_path}")
    config = ExperimentConfig.from_file(config_path)
    return execute_config(config, output_dir, seed, threads, cache_dir, verbose)


def run_named_experiment(
    name: str,
    output_dir: Optional[Union[str, Path]] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    dt: Optional[float] = None,
    cache_dir: Optional[Union[str, Path]] = DEFAULT_CACHE_DIR,
    verbose: bool = False,
) -> ExperimentResult:
    """
    Run a catalog experiment with default settings.

    Args:
        name: Catalog name (see ``python -m memory_control list``)
        output_dir: Parent directory of run folders
        seed: Seed override
        threads: Worker threads
        dt: Time step override (default: the configured 1e-3)
        cache_dir: System cache directory, or None to disable
        verbose: Enable verbose logging

    Returns:
        ExperimentResult with output paths and check verdicts

    Raises:
        ValidationError: If the name is unknown or dt is unstable for the experiment
    """
    if verbose:
        logging.basicConfig(level=logging.INFO, format="%(asctime)s [%(levelname)s] %(message)s")

    config = ExperimentConfig.from_dict({"experiment": {"name": name}})
    return execute_config(config, output_dir, seed, threads, cache_dir, verbose, dt)
