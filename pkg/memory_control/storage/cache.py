"""File cache for MacCamy-transformed systems.

Test Coverage: tests/test_cache.py
- Key generation: stable across calls, sensitive to alpha, memory, grid and rule
- get/set round trip with bitwise-equal kernels
- TTL expiration, clear, prune_expired, get_stats
- Corrupt entries are treated as misses
"""

import hashlib
import json
import logging
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from memory_control.core.exceptions import CacheError
from memory_control.numerics.convolution import QuadratureRule
from memory_control.numerics.kernels import SampledKernel, TimeGrid
from memory_control.numerics.maccamy import FirstOrderProblem, SecondOrderSystem


logger = logging.getLogger(__name__)


CACHE_FORMAT = 1
KERNEL_NAMES = ("kernel", "kernel_pre", "resolvent", "resolvent_prime")


class SystemCache:
    """
    File-based cache of second-order systems keyed by their first-order problem.

    Cache structure:
        {cache_dir}/
            {hash}.system.json     # Scalar constants (alpha, a, b, b_pre, grid)
            {hash}.{kernel}.csv    # One (t, value) table per kernel
            {hash}.meta.json       # Timestamp and the key record
    """

    def __init__(self, cache_dir: Path, ttl_days: int = 30):
        """
        Initialize system cache.

        Args:
            cache_dir: Directory for cache storage
            ttl_days: Time-to-live in days (default: 30)
        """
        self.cache_dir = Path(cache_dir)
        self.ttl_seconds = ttl_days * 24 * 60 * 60
        try:
            self.cache_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise CacheError(f"Cannot create cache directory {self.cache_dir}: {e}") from e
        logger.info(f"Initialized SystemCache at {self.cache_dir} (TTL: {ttl_days} days)")

    @staticmethod
    def problem_key(problem: FirstOrderProblem) -> Dict[str, Any]:
        """Key record of a first-order problem; sampled-only memories are keyed by their bytes."""
        memory = problem.memory
        if memory.closed_form is not None:
            memory_key: Any = {"family": memory.closed_form.name, "params": memory.closed_form.params}
        else:
            memory_key = hashlib.sha256(np.ascontiguousarray(memory.values).tobytes()).hexdigest()
        return {
            "format": CACHE_FORMAT,
            "alpha": problem.alpha,
            "memory": memory_key,
            "t_end": problem.grid.t_end,
            "n_steps": problem.grid.n_steps,
            "rule": problem.rule.name,
            "tolerance": problem.tolerance,
        }

    def _compute_key(self, record: Dict[str, Any]) -> str:
        data = json.dumps(record, sort_keys=True, default=str)
        return hashlib.sha256(data.encode()).hexdigest()

    def _paths(self, cache_key: str) -> Dict[str, Path]:
        paths = {
            "system": self.cache_dir / f"{cache_key}.system.json",
            "meta": self.cache_dir / f"{cache_key}.meta.json",
        }
        for name in KERNEL_NAMES:
            paths[name] = self.cache_dir / f"{cache_key}.{name}.csv"
        return paths

    def get(self, record: Dict[str, Any], grid: TimeGrid, rule: QuadratureRule) -> Optional[SecondOrderSystem]:
        """
        Retrieve a system if cached and not expired.

        Args:
            record: Key record from :meth:`problem_key`
            grid: Time grid the kernels live on
            rule: Quadrature rule of the problem

        Returns:
            Cached system (without its problem attached), or None if not found/expired
        """
        cache_key = self._compute_key(record)
        paths = self._paths(cache_key)
        if not all(path.exists() for path in paths.values()):
            return None

        try:
            with open(paths["meta"], "r") as f:
                metadata = json.load(f)

            age_seconds = time.time() - metadata.get("timestamp", 0)
            if age_seconds > self.ttl_seconds:
                logger.debug(f"Cache EXPIRED: {cache_key[:8]}... (age: {age_seconds/86400:.1f} days)")
                self._delete_entry(cache_key)
                return None

            with open(paths["system"], "r") as f:
                constants = json.load(f)
            kernels = {name: self._read_kernel(paths[name], grid, name) for name in KERNEL_NAMES}
            system = SecondOrderSystem.from_record(constants, kernels, rule)
            logger.debug(f"Cache HIT: {cache_key[:8]}... (alpha={record['alpha']})")
            return system

        except Exception as e:
            logger.warning(f"Cache read error for {cache_key[:8]}...: {e}")
            return None

    def set(self, record: Dict[str, Any], system: SecondOrderSystem) -> None:
        """
        Store a system in the cache.

        Args:
            record: Key record from :meth:`problem_key`
            system: Transformed system to cache
        """
        cache_key = self._compute_key(record)
        paths = self._paths(cache_key)
        constants, kernels = system.to_record()

        try:
            with open(paths["system"], "w") as f:
                json.dump(constants, f, indent=2, sort_keys=True)
            for name, kernel in kernels.items():
                self._write_kernel(paths[name], kernel)

            metadata = {"timestamp": time.time(), "key": record, "a": system.a, "b": system.b}
            with open(paths["meta"], "w") as f:
                json.dump(metadata, f, indent=2, default=str)

            logger.debug(f"Cache SET: {cache_key[:8]}... (a={system.a:.6g}, b={system.b:.6g})")

        except Exception as e:
            logger.error(f"Failed to cache system {cache_key[:8]}...: {e}")
            self._delete_entry(cache_key)

    @staticmethod
    def _write_kernel(path: Path, kernel: SampledKernel) -> None:
        t, values = kernel.to_columns()
        if np.iscomplexobj(values):
            table = np.column_stack([t, values.real, values.imag])
            header = "t,real,imag"
        else:
            table = np.column_stack([t, values])
            header = "t,value"
        np.savetxt(path, table, delimiter=",", header=header, comments="", fmt="%.17g")

    @staticmethod
    def _read_kernel(path: Path, grid: TimeGrid, name: str) -> SampledKernel:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if table.shape[0] != grid.size:
            raise CacheError(f"Cached kernel {path.name} has {table.shape[0]} rows, expected {grid.size}")
        values = table[:, 1] + 1j * table[:, 2] if table.shape[1] == 3 else table[:, 1]
        return SampledKernel(grid, values, label=name)

    def _delete_entry(self, cache_key: str) -> None:
        """Delete every file of a cache entry."""
        for path in self._paths(cache_key).values():
            if path.exists():
                path.unlink()

    def _entry_keys(self) -> List[str]:
        return [meta_file.name[: -len(".meta.json")] for meta_file in self.cache_dir.glob("*.meta.json")]

    def clear(self) -> int:
        """
        Clear all cached entries.

        Returns:
            Number of entries deleted
        """
        keys = self._entry_keys()
        for cache_key in keys:
            self._delete_entry(cache_key)

        logger.info(f"Cleared cache: {len(keys)} entries deleted")
        return len(keys)

    def prune_expired(self) -> int:
        """
        Remove expired cache entries.

        Returns:
            Number of entries pruned
        """
        count = 0
        current_time = time.time()

        for cache_key in self._entry_keys():
            meta_file = self.cache_dir / f"{cache_key}.meta.json"
            try:
                with open(meta_file, "r") as f:
                    metadata = json.load(f)
                if current_time - metadata.get("timestamp", 0) > self.ttl_seconds:
                    self._delete_entry(cache_key)
                    count += 1
            except Exception as e:
                logger.warning(f"Error checking {meta_file}: {e}")

        logger.info(f"Pruned cache: {count} expired entries deleted")
        return count

    def get_stats(self) -> dict:
        """
        Get cache statistics.

        Returns:
            Dictionary with cache stats (entry_count, total_size_mb, etc.)
        """
        files = [path for path in self.cache_dir.iterdir() if path.is_file()]
        total_size_mb = sum(path.stat().st_size for path in files) / (1024 * 1024)

        return {
            "entry_count": len(self._entry_keys()),
            "total_size_mb": round(total_size_mb, 2),
            "cache_dir": str(self.cache_dir),
            "ttl_days": self.ttl_seconds / 86400,
        }
