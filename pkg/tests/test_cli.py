"""Tests for CLI interface (__main__.py).

Test Coverage Goals:
- Argument parsing (subcommands, seed parsing, version)
- list output
- run and check success
- Failed checks with and without --check
- Error handling (file not found, validation errors, solver errors, interrupt)
- Cache flags
- Exit codes
"""

import json
from pathlib import Path
from unittest.mock import patch

import pytest

from memory_control import __version__
from memory_control.__main__ import EXIT_CHECKS_FAILED, EXIT_ERROR, EXIT_INTERRUPTED, EXIT_OK, build_parser, main
from memory_control.core.catalog import CATALOG
from memory_control.core.exceptions import ControllabilityError
from memory_control.core.results import CheckOutcome, ExperimentResult


def fake_result(tmp_path: Path, passed: bool = True, name: str = "steer-wave") -> ExperimentResult:
    check = CheckOutcome.at_most("verification residual", 1e-4 if passed else 1.0, 1e-3)
    return ExperimentResult(
        name=name,
        kind="steer",
        output_dir=tmp_path / name,
        report_path=tmp_path / name / "report.json",
        checks=[check],
    )


# ============================================================================
# Argument Parsing Tests
# ============================================================================


class TestArgumentParsing:
    """Test command-line argument parsing."""

    def test_seed_accepts_hex(self):
        """Test seeds parse with any integer base prefix."""
        args = build_parser().parse_args(["check", "riesz-gram", "--seed", "0x10"])

        assert args.seed == 16

    def test_negative_seed_rejected(self):
        """Test seeds must be unsigned 64-bit integers."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["check", "--seed", "-1"])

    def test_oversized_seed_rejected(self):
        """Test seeds above 2**64 - 1 are rejected."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["check", "--seed", str(2**64)])

    def test_run_requires_config(self):
        """Test run needs --config."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["run"])

    def test_command_required(self):
        """Test a subcommand is required."""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_defaults(self):
        """Test default flag values."""
        args = build_parser().parse_args(["check"])

        assert args.names == []
        assert args.check is False
        assert args.no_cache is False
        assert args.cache_dir == Path(".memory_cache")

    def test_version(self, capsys):
        """Test --version prints the package version."""
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])

        assert exc_info.value.code == 0
        assert __version__ in capsys.readouterr().out


# ============================================================================
# List Tests
# ============================================================================


class TestList:
    """Test the list subcommand."""

    def test_list_prints_catalog(self, capsys):
        """Test every catalog entry is listed with its description."""
        assert main(["list"]) == EXIT_OK

        out = capsys.readouterr().out
        for name, entry in CATALOG.items():
            assert name in out
            assert entry.description in out


# ============================================================================
# Run and Check Tests
# ============================================================================


class TestRunCommand:
    """Test the run subcommand end to end."""

    def test_run_config(self, simulate_json, tmp_path, capsys):
        """Test running a JSON config writes a report."""
        exit_code = main(["run", "--config", str(simulate_json), "--out", str(tmp_path / "out"), "--no-cache"])

        assert exit_code == EXIT_OK
        out = capsys.readouterr().out
        assert "Loading experiment configuration" in out
        assert "✓ simulate (simulate)" in out
        assert (tmp_path / "out" / "simulate-seed7" / "report.json").exists()

    def test_run_missing_config(self, tmp_path, capsys):
        """Test a missing config exits with an error."""
        exit_code = main(["run", "--config", str(tmp_path / "missing.ini"), "--no-cache"])

        assert exit_code == EXIT_ERROR
        assert "File not found" in capsys.readouterr().err

    def test_run_invalid_config(self, tmp_path, capsys):
        """Test validation errors are listed on stderr."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"domain": {"n_max": 4}, "control": {"n_modes": 8}}))

        exit_code = main(["run", "--config", str(path), "--out", str(tmp_path / "out"), "--no-cache"])

        assert exit_code == EXIT_ERROR
        err = capsys.readouterr().err
        assert "✗ Validation error:" in err
        assert "exceeds" in err

    def test_run_schema_error(self, tmp_path, capsys):
        """Test schema errors name the offending field."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"experiment": {"seed": -1}}))

        assert main(["run", "--config", str(path), "--no-cache"]) == EXIT_ERROR
        assert "experiment.seed" in capsys.readouterr().err

    def test_check_named_experiment(self, tmp_path, capsys):
        """Test checking a cheap named experiment."""
        exit_code = main(["check", "riesz-gram", "--out", str(tmp_path / "out"), "--no-cache", "--check"])

        assert exit_code == EXIT_OK
        assert "✓ riesz-gram (diagnose)" in capsys.readouterr().out


# ============================================================================
# Check Verdict Tests
# ============================================================================


class TestCheckVerdicts:
    """Test exit codes for failed acceptance checks."""

    @patch("memory_control.__main__.execute_config")
    def test_failed_checks_with_flag(self, mock_execute, tmp_path, capsys):
        """Test --check turns failed checks into exit status 2."""
        mock_execute.return_value = fake_result(tmp_path, passed=False)

        exit_code = main(["check", "steer-wave", "--check"])

        assert exit_code == EXIT_CHECKS_FAILED
        assert "Failed checks in: steer-wave" in capsys.readouterr().out

    @patch("memory_control.__main__.execute_config")
    def test_failed_checks_without_flag(self, mock_execute, tmp_path, capsys):
        """Test failed checks are reported but exit 0 without --check."""
        mock_execute.return_value = fake_result(tmp_path, passed=False)

        assert main(["check", "steer-wave"]) == EXIT_OK
        assert "Failed checks in" in capsys.readouterr().out

    @patch("memory_control.__main__.execute_config")
    def test_check_defaults_to_named_catalog(self, mock_execute, tmp_path):
        """Test check without names runs every named experiment."""
        mock_execute.return_value = fake_result(tmp_path)

        assert main(["check"]) == EXIT_OK

        named = [entry.name for entry in CATALOG.values() if not entry.generic]
        ran = [call.args[0].experiment.name for call in mock_execute.call_args_list]
        assert ran == named

    @patch("memory_control.__main__.execute_config")
    def test_overrides_forwarded(self, mock_execute, tmp_path):
        """Test flags reach execute_config."""
        mock_execute.return_value = fake_result(tmp_path)

        main(["check", "steer-wave", "--seed", "5", "--threads", "3", "--dt", "0.002", "--no-cache"])

        kwargs = mock_execute.call_args.kwargs
        assert kwargs["seed"] == 5
        assert kwargs["threads"] == 3
        assert kwargs["dt"] == 0.002
        assert kwargs["cache_dir"] is None

    @patch("memory_control.__main__.execute_config")
    def test_cache_dir_forwarded(self, mock_execute, tmp_path):
        """Test --cache-dir is passed through when caching is on."""
        mock_execute.return_value = fake_result(tmp_path)

        main(["check", "steer-wave", "--cache-dir", str(tmp_path / "cache")])

        assert mock_execute.call_args.kwargs["cache_dir"] == tmp_path / "cache"


# ============================================================================
# Error Handling Tests
# ============================================================================


class TestErrorHandling:
    """Test error exit codes."""

    @patch("memory_control.__main__.execute_config")
    def test_solver_error(self, mock_execute, capsys):
        """Test library errors print their type."""
        mock_execute.side_effect = ControllabilityError(1e-12, 1.0, 1e-8)

        assert main(["check", "steer-wave"]) == EXIT_ERROR
        assert "ControllabilityError" in capsys.readouterr().err

    @patch("memory_control.__main__.execute_config")
    def test_value_error(self, mock_execute, capsys):
        """Test configuration value errors."""
        mock_execute.side_effect = ValueError("MEMORY_CONTROL_THREADS must be an integer")

        assert main(["check", "steer-wave"]) == EXIT_ERROR
        assert "Configuration error" in capsys.readouterr().err

    @patch("memory_control.__main__.execute_config")
    def test_keyboard_interrupt(self, mock_execute, capsys):
        """Test interrupts exit with 130."""
        mock_execute.side_effect = KeyboardInterrupt()

        assert main(["check", "steer-wave"]) == EXIT_INTERRUPTED
        assert "Interrupted" in capsys.readouterr().err

    @patch("memory_control.__main__.execute_config")
    def test_unexpected_error(self, mock_execute, capsys):
        """Test anything else is reported as unexpected."""
        mock_execute.side_effect = RuntimeError("disk on fire")

        assert main(["check", "steer-wave"]) == EXIT_ERROR
        assert "Unexpected error: disk on fire" in capsys.readouterr().err
