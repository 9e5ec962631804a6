"""Experiment configuration validation (business rules beyond the pydantic schema).

Test Coverage: tests/test_validator.py
- Catalog names: unknown names, kind/name mismatch warning
- Time step stability for generic kinds and named experiments
- Kernel files and closed-form requirements of the first-order form
- Mode counts and quadrature restrictions
- Control-time warning
"""

import logging
import math
from pathlib import Path
from typing import List, Optional

from memory_control.core.catalog import CATALOG, CatalogEntry, build_domain, generic_max_frequency
from memory_control.core.exceptions import MemoryControlError
from memory_control.core.models import ExperimentConfig
from memory_control.core.results import ValidationResult


logger = logging.getLogger(__name__)


class ExperimentValidator:
    """
    Validates experiment configurations before anything is computed or written.

    Pydantic handles the schema. This validator checks:
    - Catalog names and kinds
    - Stability of the explicit time stepping (dt * lambda_max < 2)
    - Kernel sources and the first-order form's closed-form requirement
    - Mode counts against the domain
    - Quadrature restrictions of control synthesis
    - Horizon against the geometric control time (warning only)
    """

    STABILITY_LIMIT = 2.0
    SYNTHESIS_KINDS = ("steer", "diagnose")
    MAX_GRID_STEPS = 10_000_000

    def __init__(self):
        """Initialize validator."""
        self.errors: List[str] = []
        self.warnings: List[str] = []

    def validate(self, config: ExperimentConfig) -> ValidationResult:
        """
        Validate an experiment configuration.

        Args:
            config: Parsed experiment configuration

        Returns:
            ValidationResult with is_valid flag and error/warning lists
        """
        self.errors = []
        self.warnings = []

        entry = self._validate_catalog(config)
        if entry is not None and not entry.generic:
            self._validate_named_stability(config, entry)
        else:
            self._validate_kernel_source(config)
            self._validate_modes(config)
            self._validate_quadrature(config)
            if not self.errors:
                self._validate_generic_stability(config)
                self._validate_control_time(config)
        self._validate_grid_size(config)

        is_valid = len(self.errors) == 0
        name = config.run_name

        if is_valid:
            logger.info(f"Validation passed for '{name}' ({len(self.warnings)} warnings)")
        else:
            logger.error(f"Validation failed for '{name}' ({len(self.errors)} errors)")

        return ValidationResult(is_valid=is_valid, errors=self.errors.copy(), warnings=self.warnings.copy())

    def _validate_catalog(self, config: ExperimentConfig) -> Optional[CatalogEntry]:
        """Resolve the catalog entry; unknown names are errors, kind mismatches warnings."""
        spec = config.experiment
        if spec.name is None:
            return CATALOG[spec.kind]

        entry = CATALOG.get(spec.name)
        if entry is None:
            self.errors.append(f"Unknown experiment '{spec.name}' (run 'list' for the catalog)")
            return None
        if entry.kind != spec.kind and "kind" in spec.model_fields_set:
            self.warnings.append(
                f"Experiment '{spec.name}' is a {entry.kind} experiment; configured kind '{spec.kind}' is ignored"
            )
        return entry

    def _validate_named_stability(self, config: ExperimentConfig, entry: CatalogEntry) -> None:
        dt = config.grid.dt
        if entry.max_frequency > 0 and dt * entry.max_frequency >= self.STABILITY_LIMIT:
            self.errors.append(
                f"Time step too large for '{entry.name}': dt * lambda_max = {dt * entry.max_frequency:.3g} "
                f"(lambda_max = {entry.max_frequency:g}, need < {self.STABILITY_LIMIT:g}; "
                f"use dt < {self.STABILITY_LIMIT / entry.max_frequency:.4g})"
            )

    def _validate_kernel_source(self, config: ExperimentConfig) -> None:
        kernel = config.kernel
        if kernel.family == "csv":
            if kernel.path is None or not Path(kernel.path).exists():
                self.errors.append(f"Kernel file not found: {kernel.path}")
            if config.problem.form == "first_order":
                self.errors.append("The first-order form needs a closed-form memory kernel (the transform differentiates it)")

        if config.problem.form == "first_order" and (config.problem.b != 0.0 or config.problem.velocity != 0.0):
            self.warnings.append("problem.b and problem.velocity are ignored by the first-order form")

    def _validate_modes(self, config: ExperimentConfig) -> None:
        n = config.control.n_modes
        if config.domain.kind == "interval" or config.domain.lambda_cutoff is None:
            available = config.domain.n_max
        else:
            try:
                available = build_domain(config.domain).n_modes
            except MemoryControlError as e:
                self.errors.append(f"Domain: {e}")
                return
        if n > available:
            self.errors.append(f"control.n_modes = {n} exceeds the {available} modes of the domain")

    def _validate_quadrature(self, config: ExperimentConfig) -> None:
        if config.grid.quadrature != "trapezoid" and config.experiment.kind in self.SYNTHESIS_KINDS:
            self.errors.append(
                f"Kind '{config.experiment.kind}' requires trapezoid memory quadrature "
                f"(got '{config.grid.quadrature}'); the Gregory rule is for identity checks"
            )

    def _validate_generic_stability(self, config: ExperimentConfig) -> None:
        try:
            lam_max = generic_max_frequency(config)
        except (MemoryControlError, IndexError) as e:
            self.errors.append(f"Domain: {e}")
            return
        dt = config.grid.dt
        if lam_max > 0 and dt * lam_max >= self.STABILITY_LIMIT:
            self.errors.append(
                f"Time step too large: dt * lambda_max = {dt * lam_max:.3g} (lambda_max = {lam_max:.6g}, "
                f"need < {self.STABILITY_LIMIT:g}; use dt < {self.STABILITY_LIMIT / lam_max:.4g})"
            )

    def _validate_control_time(self, config: ExperimentConfig) -> None:
        """Warn when T is below the time a boundary ray needs to reach the active boundary."""
        if config.experiment.kind not in self.SYNTHESIS_KINDS:
            return
        domain = config.domain
        if domain.kind == "interval":
            control_time = domain.length if domain.gamma[0] == "both" else 2.0 * domain.length
        else:
            assert domain.width is not None
            control_time = 2.0 * math.hypot(domain.length, domain.width)
        if config.grid.horizon < control_time:
            self.warnings.append(
                f"Horizon T = {config.grid.horizon:.4g} is below the geometric control time {control_time:.4g}; "
                f"expect ill-conditioned synthesis"
            )

    def _validate_grid_size(self, config: ExperimentConfig) -> None:
        if config.grid.n_steps > self.MAX_GRID_STEPS:
            self.errors.append(f"Time grid too fine: {config.grid.n_steps} steps (max: {self.MAX_GRID_STEPS})")
