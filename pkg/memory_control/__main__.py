"""Command-line interface for the memory control library.

Usage:
    python -m memory_control list
    python -m memory_control run --config experiment.ini --out runs
    python -m memory_control check steer-wave maccamy-equivalence --check

Test Coverage: tests/test_cli.py
- Argument parsing for the three subcommands
- list output
- run/check success, failed checks (exit 2) and --check handling
- Error handling (missing file, validation, solver errors, interrupt)
- Cache flags and overrides
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from memory_control import __version__
from memory_control.api import DEFAULT_CACHE_DIR, execute_config
from memory_control.core.catalog import CATALOG, list_experiments
from memory_control.core.exceptions import MemoryControlError, ValidationError
from memory_control.core.models import ExperimentConfig


EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CHECKS_FAILED = 2
EXIT_INTERRUPTED = 130


def _seed(value: str) -> int:
    seed = int(value, 0)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memory_control",
        description="Spectral solver and boundary-control synthesizer for the wave equation with memory",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Show the experiment catalog
  python -m memory_control list

  # Run a configured experiment
  python -m memory_control run --config configs/steer_memory.ini

  # Run named experiments and fail on any failed acceptance check
  python -m memory_control check steer-wave duality-consistency --check

Environment Variables:
  MEMORY_CONTROL_OUTPUT_DIR   Parent directory of run folders
  MEMORY_CONTROL_THREADS      Worker threads for mode sweeps
  MEMORY_CONTROL_CACHE_DIR    Cache of transformed systems
        """,
    )
    parser.add_argument("--version", action="version", version=f"memory_control {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="Parent directory of run folders")
    common.add_argument("--check", action="store_true", help="Exit with status 2 if any acceptance check fails")
    common.add_argument("--seed", type=_seed, default=None, help="Seed (unsigned 64-bit) for the random data")
    common.add_argument("--threads", type=int, default=None, help="Worker threads for mode sweeps")
    common.add_argument("--dt", type=float, default=None, help="Time step override")
    common.add_argument(
        "--cache-dir", type=Path, default=Path(DEFAULT_CACHE_DIR), help=f"System cache directory (default: {DEFAULT_CACHE_DIR})"
    )
    common.add_argument("--no-cache", action="store_true", help="Disable the system cache")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")

    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("list", help="List catalog experiments")

    run_parser = subparsers.add_parser("run", parents=[common], help="Run an experiment from a configuration file")
    run_parser.add_argument("--config", type=Path, required=True, help="INI or JSON experiment configuration")

    check_parser = subparsers.add_parser("check", parents=[common], help="Run named catalog experiments")
    check_parser.add_argument("names", nargs="*", help="Experiment names (default: every named experiment)")

    return parser


def _configs(args: argparse.Namespace) -> List[ExperimentConfig]:
    if args.command == "run":
        print(f"Loading experiment configuration from {args.config}")
        return [ExperimentConfig.from_file(args.config)]

    names = args.names or [entry.name for entry in CATALOG.values() if not entry.generic]
    return [ExperimentConfig.from_dict({"experiment": {"name": name}}) for name in names]


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "list":
        for name, description in list_experiments():
            print(f"{name:<26} {description}")
        return EXIT_OK

    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(asctime)s [%(levelname)s] %(message)s")

    try:
        failed: List[str] = []
        for config in _configs(args):
            result = execute_config(
                config,
                output_dir=args.out,
                seed=args.seed,
                threads=args.threads,
                cache_dir=None if args.no_cache else args.cache_dir,
                verbose=args.verbose,
                dt=args.dt,
            )
            print(str(result))
            if not result.passed:
                failed.append(result.name)

        if failed:
            print(f"\n✗ Failed checks in: {', '.join(failed)}")
            if args.check:
                return EXIT_CHECKS_FAILED
        return EXIT_OK

    except FileNotFoundError as e:
        print(f"✗ File not found: {e}", file=sys.stderr)
        return EXIT_ERROR

    except ValidationError as e:
        print("✗ Validation error:", file=sys.stderr)
        for error in e.errors:
            print(f"  ✗ {error}", file=sys.stderr)
        return EXIT_ERROR

    except MemoryControlError as e:
        print(f"✗ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR

    except ValueError as e:
        print(f"✗ Configuration error: {e}", file=sys.stderr)
        return EXIT_ERROR

    except KeyboardInterrupt:
        print("\n✗ Interrupted by user", file=sys.stderr)
        return EXIT_INTERRUPTED

    except Exception as e:
        print(f"✗ Unexpected error: {e}", file=sys.stderr)
        if args.verbose:
            import traceback

            traceback.print_exc()
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
