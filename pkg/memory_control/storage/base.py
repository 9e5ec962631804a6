"""Abstract storage interface for run artifacts (reports and CSV tables)."""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, List, Sequence, Tuple, Union

import numpy as np


class Storage(ABC):
    """Backend that owns one folder per run and the artifacts written into it."""

    @abstractmethod
    def create_run_dir(self, run_name: str) -> Path:
        """
        Create (or reuse) the folder holding a run's report and tables.

        Args:
            run_name: Folder name, ``<name>-seed<seed>``

        Raises:
            StorageError: If the folder cannot be created
        """

    @abstractmethod
    def write_json(self, path: Union[str, Path], data: Any) -> Path:
        """Write ``data`` as indented JSON with sorted keys; StorageError if it cannot be encoded."""

    @abstractmethod
    def read_json(self, path: Union[str, Path]) -> Any:
        """Load a JSON artifact. Missing files raise FileNotFoundError, unreadable ones StorageError."""

    @abstractmethod
    def write_text(self, path: Union[str, Path], text: str) -> Path:
        pass

    @abstractmethod
    def read_text(self, path: Union[str, Path]) -> str:
        pass

    @abstractmethod
    def write_csv(self, path: Union[str, Path], header: Sequence[str], rows: np.ndarray) -> Path:
        """
        Write a numeric table at full double precision.

        Args:
            path: Output file
            header: Column names, one per column of ``rows``
            rows: 2-D array, or 1-D for a single row

        Raises:
            StorageError: If the header width does not match the table
        """

    @abstractmethod
    def read_csv(self, path: Union[str, Path]) -> Tuple[List[str], np.ndarray]:
        """Read a table written by :meth:`write_csv` back as (header, rows)."""

    @abstractmethod
    def exists(self, path: Union[str, Path]) -> bool:
        pass

    @abstractmethod
    def list_files(self, directory: Union[str, Path], pattern: str = "*") -> List[Path]:
        """Sorted files in ``directory`` matching ``pattern``."""
