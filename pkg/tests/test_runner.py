"""Tests for ExperimentRunner orchestrator.

Test Coverage Goals:
- Runner initialization and verbose logging
- Validation without computing
- Full run: report.json, report.txt and CSV attachments
- Validation failures write nothing
- Deterministic reports
- Error wrapping and pass-through
- System cache counters
"""

import json

import pytest

from memory_control.core.catalog import CatalogEntry
from memory_control.core.exceptions import ExperimentError, StabilityError, ValidationError
from memory_control.core.models import ExperimentConfig
from memory_control.core.results import CheckOutcome
from memory_control.core.runner import ExperimentRunner
from memory_control.core.validator import ExperimentValidator
from memory_control.storage.filesystem import FileSystemStorage


@pytest.fixture
def runner(temp_storage):
    return ExperimentRunner(storage=temp_storage)


@pytest.fixture
def first_order_config(simulate_dict):
    simulate_dict["problem"] = {"form": "first_order", "alpha": 0.5}
    return ExperimentConfig.from_dict(simulate_dict)


# ============================================================================
# Initialization Tests
# ============================================================================


class TestRunnerInit:
    """Test runner construction."""

    def test_defaults(self, temp_storage):
        """Test a default validator and no cache."""
        runner = ExperimentRunner(storage=temp_storage)

        assert runner.storage is temp_storage
        assert isinstance(runner.validator, ExperimentValidator)
        assert runner.cache is None
        assert runner.verbose is False

    def test_verbose_configures_logging(self, temp_storage, mocker):
        """Test verbose mode sets up logging."""
        basic_config = mocker.patch("memory_control.core.runner.logging.basicConfig")

        ExperimentRunner(storage=temp_storage, verbose=True)

        basic_config.assert_called_once()

    def test_run_dir_name(self, simulate_config):
        """Test run folders are named by experiment and seed."""
        assert ExperimentRunner.run_dir_name(simulate_config) == "simulate-seed7"


# ============================================================================
# Validation and Execution Tests
# ============================================================================


class TestValidateAndExecute:
    """Test validation and in-memory execution."""

    def test_validate(self, runner, simulate_config):
        """Test validate() returns the validator's verdict."""
        assert runner.validate(simulate_config).is_valid

    def test_execute_writes_nothing(self, runner, simulate_config, temp_storage):
        """Test execute() keeps everything in memory."""
        outcome = runner.execute(simulate_config)

        assert "field" in outcome.tables
        assert list(temp_storage.base_dir.iterdir()) == []

    def test_invalid_config_raises_and_writes_nothing(self, runner, simulate_dict, temp_storage):
        """Test validation errors stop the run before any output."""
        simulate_dict["control"]["n_modes"] = 10
        config = ExperimentConfig.from_dict(simulate_dict)

        with pytest.raises(ValidationError) as exc_info:
            runner.run(config)

        assert any("exceeds" in error for error in exc_info.value.errors)
        assert list(temp_storage.base_dir.iterdir()) == []

    def test_unexpected_error_wrapped(self, runner, simulate_config, mocker):
        """Test unexpected exceptions become ExperimentError."""

        def broken(ctx, outcome):
            raise RuntimeError("boom")

        mocker.patch(
            "memory_control.core.runner.resolve_entry",
            return_value=CatalogEntry("broken", "simulate", "always fails", broken, generic=True),
        )

        with pytest.raises(ExperimentError, match="Experiment 'broken' failed: boom") as exc_info:
            runner.execute(simulate_config)

        assert isinstance(exc_info.value.original_error, RuntimeError)

    def test_solver_error_passes_through(self, runner, simulate_config, mocker):
        """Test library errors keep their type."""

        def unstable(ctx, outcome):
            raise StabilityError(0.5, 8.0)

        mocker.patch(
            "memory_control.core.runner.resolve_entry",
            return_value=CatalogEntry("unstable", "simulate", "always unstable", unstable, generic=True),
        )

        with pytest.raises(StabilityError):
            runner.execute(simulate_config)


# ============================================================================
# Full Run Tests
# ============================================================================


class TestRun:
    """Test complete runs with report writing."""

    def test_run_writes_outputs(self, runner, simulate_config, temp_storage):
        """Test the run folder holds the report and every table."""
        result = runner.run(simulate_config)

        assert result.output_dir == temp_storage.base_dir / "simulate-seed7"
        assert result.report_path.name == "report.json"
        assert (result.output_dir / "report.txt").exists()
        assert [path.name for path in result.files] == ["eigen.csv", "field.csv", "mode_1.csv", "trace.csv"]
        assert all(path.exists() for path in result.files)

    def test_report_contents(self, runner, simulate_config):
        """Test report.json records the run."""
        result = runner.run(simulate_config)

        report = json.loads(result.report_path.read_text())
        assert report["experiment"]["name"] == "simulate"
        assert report["passed"] is True
        assert report["attachments"] == ["eigen.csv", "field.csv", "mode_1.csv", "trace.csv"]
        assert report["metrics"]["terminal_l2"] == pytest.approx(result.metrics["terminal_l2"])
        assert "system_cache" not in report

    def test_result_fields(self, runner, simulate_config):
        """Test the returned result summary."""
        result = runner.run(simulate_config)

        assert result.name == "simulate"
        assert result.kind == "simulate"
        assert result.passed
        assert result.cache_hit is None
        assert result.elapsed_seconds >= 0.0
        assert "simulate (simulate)" in str(result)

    def test_reports_are_deterministic(self, tmp_path, simulate_config):
        """Test two identical runs write byte-identical reports."""
        first = ExperimentRunner(storage=FileSystemStorage(tmp_path / "a")).run(simulate_config)
        second = ExperimentRunner(storage=FileSystemStorage(tmp_path / "b")).run(simulate_config)

        assert first.report_path.read_bytes() == second.report_path.read_bytes()
        for a, b in zip(first.files, second.files):
            assert a.read_bytes() == b.read_bytes()

    def test_failed_checks_reported(self, runner, simulate_config, mocker):
        """Test failed checks are written, not raised."""

        def failing(ctx, outcome):
            outcome.check(CheckOutcome.at_most("residual", 1.0, 1e-6))

        mocker.patch(
            "memory_control.core.runner.resolve_entry",
            return_value=CatalogEntry("failing", "steer", "fails its check", failing, generic=True),
        )

        result = runner.run(simulate_config)

        assert not result.passed
        assert result.failed_count == 1
        assert "FAILED (1 check(s))" in (result.output_dir / "report.txt").read_text()


# ============================================================================
# Cache Tests
# ============================================================================


class TestCacheCounters:
    """Test system cache counters in reports."""

    def test_miss_then_hit(self, temp_storage, temp_cache, first_order_config):
        """Test the second first-order run reuses the transformed system."""
        runner = ExperimentRunner(storage=temp_storage, cache=temp_cache)

        first = runner.run(first_order_config)
        second = runner.run(first_order_config)

        assert first.cache_hit is False
        assert second.cache_hit is True
        report = json.loads(second.report_path.read_text())
        assert report["system_cache"] == {"hits": 1, "misses": 0}

    def test_second_order_never_touches_cache(self, temp_storage, temp_cache, simulate_config):
        """Test second-order runs report zero cache traffic."""
        result = ExperimentRunner(storage=temp_storage, cache=temp_cache).run(simulate_config)

        assert result.cache_hit is False
        assert json.loads(result.report_path.read_text())["system_cache"] == {"hits": 0, "misses": 0}
