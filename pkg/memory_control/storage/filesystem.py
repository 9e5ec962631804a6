"""Filesystem storage implementation.

Test Coverage: tests/test_storage.py
- Run directory creation and lookup
- JSON writing (sorted keys) and reading, invalid JSON
- Text and CSV writing, CSV read back bitwise
- File listing and error handling
- Run deletion
"""

import json
import logging
import shutil
from pathlib import Path
from typing import Any, List, Sequence, Tuple, Union

import numpy as np

from memory_control.core.exceptions import StorageError
from memory_control.storage.base import Storage


logger = logging.getLogger(__name__)


CSV_FORMAT = "%.17g"


class FileSystemStorage(Storage):
    """
    Local filesystem storage backend.

    Stores run reports and tables in a local directory structure:
        {base_dir}/
            {run_name}/
                report.json
                report.txt
                {table}.csv
    """

    def __init__(self, base_dir: Union[str, Path] = "runs"):
        """
        Initialize filesystem storage.

        Args:
            base_dir: Base directory for all runs (default: "runs")
        """
        self.base_dir = Path(base_dir)
        try:
            self.base_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageError(f"Failed to create output directory '{self.base_dir}': {e}") from e
        logger.info(f"Initialized FileSystemStorage at {self.base_dir.absolute()}")

    def create_run_dir(self, run_name: str) -> Path:
        run_dir = self.base_dir / run_name

        try:
            run_dir.mkdir(parents=True, exist_ok=True)
            logger.info(f"Created run directory: {run_dir}")
            return run_dir
        except Exception as e:
            raise StorageError(f"Failed to create directory '{run_dir}': {e}") from e

    def write_json(self, path: Union[str, Path], data: Any) -> Path:
        path = Path(path)

        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            text = json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=True)
            path.write_text(text + "\n", encoding="utf-8")
            logger.debug(f"Wrote JSON file: {path}")
            return path

        except (TypeError, ValueError) as e:
            raise StorageError(f"Data is not JSON-serializable: {e}") from e
        except Exception as e:
            raise StorageError(f"Failed to write JSON to '{path}': {e}") from e

    def read_json(self, path: Union[str, Path]) -> Any:
        path = Path(path)

        if not path.exists():
            raise FileNotFoundError(f"JSON file not found: {path}")

        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
            logger.debug(f"Read JSON file: {path}")
            return data

        except json.JSONDecodeError as e:
            raise StorageError(f"Invalid JSON in '{path}': {e}") from e
        except Exception as e:
            raise StorageError(f"Failed to read JSON from '{path}': {e}") from e

    def write_text(self, path: Union[str, Path], text: str) -> Path:
        path = Path(path)

        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            logger.debug(f"Wrote text file: {path}")
            return path
        except Exception as e:
            raise StorageError(f"Failed to write text to '{path}': {e}") from e

    def read_text(self, path: Union[str, Path]) -> str:
        path = Path(path)

        if not path.exists():
            raise FileNotFoundError(f"Text file not found: {path}")

        try:
            return path.read_text(encoding="utf-8")
        except Exception as e:
            raise StorageError(f"Failed to read text from '{path}': {e}") from e

    def write_csv(self, path: Union[str, Path], header: Sequence[str], rows: np.ndarray) -> Path:
        """
        Write a real table with 17 significant digits, so values read back bitwise.

        Complex columns are not accepted; callers split them into real and imaginary parts.
        """
        path = Path(path)
        table = np.atleast_2d(np.asarray(rows))
        if np.iscomplexobj(table):
            raise StorageError(f"Complex table for '{path.name}'; write real and imaginary columns separately")
        if table.shape[1] != len(header):
            raise StorageError(f"Table '{path.name}' has {table.shape[1]} columns but {len(header)} header names")

        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            np.savetxt(path, table.astype(float), delimiter=",", header=",".join(header), comments="", fmt=CSV_FORMAT)
            logger.debug(f"Wrote CSV file: {path} ({table.shape[0]} rows)")
            return path
        except Exception as e:
            raise StorageError(f"Failed to write CSV to '{path}': {e}") from e

    def read_csv(self, path: Union[str, Path]) -> Tuple[List[str], np.ndarray]:
        path = Path(path)

        if not path.exists():
            raise FileNotFoundError(f"CSV file not found: {path}")

        try:
            with open(path, "r", encoding="utf-8") as f:
                header = f.readline().strip().split(",")
            rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
            return header, rows
        except Exception as e:
            raise StorageError(f"Failed to read CSV from '{path}': {e}") from e

    def exists(self, path: Union[str, Path]) -> bool:
        return Path(path).exists()

    def list_files(self, directory: Union[str, Path], pattern: str = "*") -> List[Path]:
        directory = Path(directory)

        if not directory.exists():
            raise StorageError(f"Directory does not exist: {directory}")

        if not directory.is_dir():
            raise StorageError(f"Path is not a directory: {directory}")

        try:
            return sorted(f for f in directory.glob(pattern) if f.is_file())
        except Exception as e:
            raise StorageError(f"Failed to list files in '{directory}': {e}") from e

    def get_run_dir(self, run_name: str) -> Path:
        """Path to a run directory (does not create it)."""
        return self.base_dir / run_name

    def delete_run(self, run_name: str) -> None:
        """
        Delete a run directory and its contents.

        Raises:
            StorageError: If deletion fails
        """
        run_dir = self.get_run_dir(run_name)

        if not run_dir.exists():
            logger.warning(f"Run directory does not exist: {run_dir}")
            return

        try:
            shutil.rmtree(run_dir)
            logger.info(f"Deleted run directory: {run_dir}")
        except Exception as e:
            raise StorageError(f"Failed to delete run directory '{run_dir}': {e}") from e
