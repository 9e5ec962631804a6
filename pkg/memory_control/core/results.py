"""Result classes for experiment runs.

Test Coverage: integrated with validator, catalog and runner tests
- ValidationResult: validator tests
- CheckOutcome / ExperimentOutcome: catalog tests
- ExperimentResult: runner, API and CLI tests
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np


Table = Tuple[List[str], np.ndarray]
MetricValue = Union[float, int, bool, str, List[float], None]


@dataclass
class ValidationResult:
    """Result of experiment configuration validation."""

    is_valid: bool
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def __str__(self) -> str:
        if self.is_valid:
            msg = "✓ Validation passed"
            if self.warnings:
                msg += f" ({len(self.warnings)} warning(s))"
            return msg
        else:
            return f"✗ Validation failed with {len(self.errors)} error(s)"


@dataclass
class CheckOutcome:
    """One acceptance check: a measured value against a bound."""

    name: str
    value: float
    bound: Union[float, Tuple[float, float]]
    passed: bool
    relation: str = "<="

    @classmethod
    def at_most(cls, name: str, value: float, bound: float) -> "CheckOutcome":
        return cls(name, float(value), float(bound), bool(value <= bound), "<=")

    @classmethod
    def at_least(cls, name: str, value: float, bound: float) -> "CheckOutcome":
        return cls(name, float(value), float(bound), bool(value >= bound), ">=")

    @classmethod
    def within(cls, name: str, value: float, low: float, high: float) -> "CheckOutcome":
        return cls(name, float(value), (float(low), float(high)), bool(low <= value <= high), "in")

    @classmethod
    def holds(cls, name: str, condition: bool) -> "CheckOutcome":
        return cls(name, float(bool(condition)), 1.0, bool(condition), "==")

    def to_dict(self) -> dict:
        bound = list(self.bound) if isinstance(self.bound, tuple) else self.bound
        return {"name": self.name, "value": self.value, "bound": bound, "relation": self.relation, "passed": self.passed}

    def __str__(self) -> str:
        mark = "✓" if self.passed else "✗"
        if self.relation == "==":
            return f"{mark} {self.name}"
        if isinstance(self.bound, tuple):
            return f"{mark} {self.name}: {self.value:.4g} in [{self.bound[0]:.4g}, {self.bound[1]:.4g}]"
        return f"{mark} {self.name}: {self.value:.4g} {self.relation} {self.bound:.4g}"


@dataclass
class ExperimentOutcome:
    """What an experiment produced, before it is written anywhere."""

    name: str
    kind: str
    description: str
    metrics: Dict[str, MetricValue] = field(default_factory=dict)
    checks: List[CheckOutcome] = field(default_factory=list)
    tables: Dict[str, Table] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed_checks(self) -> List[CheckOutcome]:
        return [check for check in self.checks if not check.passed]

    def check(self, outcome: CheckOutcome) -> CheckOutcome:
        self.checks.append(outcome)
        return outcome


@dataclass
class ExperimentResult:
    """Result of a complete run, including where its report was written."""

    name: str
    kind: str
    output_dir: Path
    report_path: Path
    checks: List[CheckOutcome] = field(default_factory=list)
    metrics: Dict[str, MetricValue] = field(default_factory=dict)
    files: List[Path] = field(default_factory=list)
    cache_hit: Optional[bool] = None
    elapsed_seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed_count(self) -> int:
        return sum(1 for check in self.checks if not check.passed)

    def __str__(self) -> str:
        status = "✓" if self.passed else "✗"
        lines = [
            f"{status} {self.name} ({self.kind}): {len(self.checks) - self.failed_count}/{len(self.checks)} checks passed",
            f"  Output directory: {self.output_dir}",
            f"  Report: {self.report_path.name}",
            f"  Attachments: {len(self.files)}",
        ]
        lines.extend(f"  {check}" for check in self.checks)
        if self.cache_hit is not None:
            lines.append(f"  System cache: {'hit' if self.cache_hit else 'miss'}")
        return "\n".join(lines)
