"""Experiment runner orchestrator.

Test Coverage: tests/test_runner.py
- Runner initialization and verbose logging
- Validation failures write nothing
- Full run: report.json, report.txt and CSV attachments
- Deterministic reports across repeated runs
- Error wrapping of unexpected failures
- System cache counters
"""

import logging
import time
from typing import List, Optional, Tuple

from memory_control.core.catalog import ExperimentContext, resolve_entry
from memory_control.core.exceptions import ExperimentError, MemoryControlError, ValidationError
from memory_control.core.models import ExperimentConfig
from memory_control.core.results import ExperimentOutcome, ExperimentResult, ValidationResult
from memory_control.core.validator import ExperimentValidator
from memory_control.processors.report import ReportBuilder
from memory_control.storage.base import Storage
from memory_control.storage.cache import SystemCache


logger = logging.getLogger(__name__)


class ExperimentRunner:
    """
    Main orchestrator for experiment runs.

    Coordinates validation, the catalog experiment and report writing.

    Usage:
        runner = ExperimentRunner(
            storage=FileSystemStorage("runs"),
            cache=SystemCache(".memory_cache"),
        )

        # Validate
        validation = runner.validate(config)

        # Run and write report.json, report.txt and CSV attachments
        result = runner.run(config)
    """

    def __init__(
        self,
        storage: Storage,
        validator: Optional[ExperimentValidator] = None,
        cache: Optional[SystemCache] = None,
        verbose: bool = False,
    ):
        """
        Initialize runner.

        Args:
            storage: Storage backend for run outputs
            validator: Validator (default: ExperimentValidator())
            cache: Optional cache of transformed systems
            verbose: Enable verbose logging
        """
        self.storage = storage
        self.validator = validator or ExperimentValidator()
        self.cache = cache
        self.verbose = verbose

        if verbose:
            logging.basicConfig(level=logging.INFO, format="%(asctime)s [%(levelname)s] %(message)s")

        logger.info("Initialized ExperimentRunner")

    def validate(self, config: ExperimentConfig) -> ValidationResult:
        """Validate a configuration without computing anything."""
        logger.info(f"Validating experiment '{config.run_name}'")
        return self.validator.validate(config)

    def execute(self, config: ExperimentConfig) -> ExperimentOutcome:
        """Run the experiment in memory, without writing outputs (see :meth:`_execute`)."""
        return self._execute(config)[0]

    def _execute(self, config: ExperimentConfig) -> Tuple[ExperimentOutcome, ExperimentContext]:
        """
        Validate and run the experiment.

        Raises:
            ValidationError: If validation fails
            ExperimentError: If the experiment fails unexpectedly
            MemoryControlError: Solver errors (stability, rank deficiency, ...) pass through
        """
        validation = self.validate(config)
        if not validation.is_valid:
            raise ValidationError(validation.errors)
        for warning in validation.warnings:
            logger.warning(warning)

        entry = resolve_entry(config)
        context = ExperimentContext(config, self.cache)
        logger.info(f"Running '{entry.name}': {entry.description}")

        try:
            outcome = entry.run(context)
        except MemoryControlError:
            raise
        except Exception as e:
            raise ExperimentError(entry.name, e) from e

        for check in outcome.checks:
            logger.info(f"  {check}")
        return outcome, context

    def run(self, config: ExperimentConfig) -> ExperimentResult:
        """
        Validate, execute and write the run's report.

        Args:
            config: Experiment configuration

        Returns:
            ExperimentResult with output paths and check verdicts

        Raises:
            ValidationError: If validation fails (nothing is written)
            ExperimentError: If the experiment fails unexpectedly
            StorageError: If outputs cannot be written
        """
        started = time.perf_counter()
        outcome, context = self._execute(config)

        run_dir = self.storage.create_run_dir(self.run_dir_name(config))
        logger.info(f"Output directory: {run_dir}")

        files: List = []
        for table_name in sorted(outcome.tables):
            header, rows = outcome.tables[table_name]
            files.append(self.storage.write_csv(run_dir / ReportBuilder.attachment_name(table_name), header, rows))

        cache_counters = None
        if self.cache is not None:
            cache_counters = {"hits": context.cache_hits, "misses": context.cache_misses}

        report = ReportBuilder.build_report(config, outcome, cache_counters)
        report_path = self.storage.write_json(run_dir / "report.json", report)
        self.storage.write_text(run_dir / "report.txt", ReportBuilder.render_text(outcome))
        logger.info(f"✓ Wrote report.json, report.txt and {len(files)} attachment(s)")

        result = ExperimentResult(
            name=outcome.name,
            kind=outcome.kind,
            output_dir=run_dir,
            report_path=report_path,
            checks=list(outcome.checks),
            metrics=dict(outcome.metrics),
            files=files,
            cache_hit=None if cache_counters is None else context.cache_hits > 0,
            elapsed_seconds=time.perf_counter() - started,
        )

        logger.info(f"Run complete: {result.name} ({result.elapsed_seconds:.1f}s)")
        return result

    @staticmethod
    def run_dir_name(config: ExperimentConfig) -> str:
        return f"{config.run_name}-seed{config.experiment.seed}"
