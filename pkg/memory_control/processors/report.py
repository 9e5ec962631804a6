"""Report builder for experiment outputs.

Test Coverage: tests/test_report.py
- JSON conversion of numpy scalars, arrays and non-finite values
- Report dictionary layout (config, checks, metrics, attachments)
- Text rendering with check marks
- Attachment file names
"""

import logging
import math
from typing import Any, Dict, List, Optional

import numpy as np

from memory_control.core.models import ExperimentConfig
from memory_control.core.results import ExperimentOutcome


logger = logging.getLogger(__name__)


REPORT_FORMAT = 1


def to_jsonable(value: Any) -> Any:
    """Plain JSON types for numpy values; non-finite floats become strings."""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else str(number)
    if isinstance(value, complex):
        return {"real": to_jsonable(value.real), "imag": to_jsonable(value.imag)}
    return value


class ReportBuilder:
    """
    Builds report.json and report.txt for a run.

    The JSON report has no timestamps, so identical runs produce identical files:
    {
        "experiment": {...},   # name, kind, description
        "config": {...},       # resolved configuration
        "checks": [...],       # acceptance checks with bound and verdict
        "metrics": {...},
        "attachments": [...]   # CSV file names
    }
    """

    @staticmethod
    def attachment_name(table_name: str) -> str:
        return f"{table_name}.csv"

    @classmethod
    def build_report(
        cls, config: ExperimentConfig, outcome: ExperimentOutcome, cache: Optional[Dict[str, int]] = None
    ) -> Dict[str, Any]:
        """
        Build the complete report dictionary.

        Args:
            config: Resolved experiment configuration
            outcome: Experiment outcome
            cache: Optional system cache counters (hits, misses)

        Returns:
            JSON-ready report dictionary
        """
        report: Dict[str, Any] = {
            "format": REPORT_FORMAT,
            "experiment": {"name": outcome.name, "kind": outcome.kind, "description": outcome.description},
            "config": config.model_dump(mode="json"),
            "passed": outcome.passed,
            "checks": [check.to_dict() for check in outcome.checks],
            "metrics": to_jsonable(outcome.metrics),
            "notes": list(outcome.notes),
            "attachments": sorted(cls.attachment_name(name) for name in outcome.tables),
        }
        if cache is not None:
            report["system_cache"] = dict(cache)

        logger.info(f"Built report for '{outcome.name}' with {len(outcome.checks)} checks")
        return to_jsonable(report)

    @classmethod
    def render_text(cls, outcome: ExperimentOutcome) -> str:
        """Human-readable summary: checks first, then metrics and notes."""
        status = "PASSED" if outcome.passed else f"FAILED ({len(outcome.failed_checks)} check(s))"
        lines: List[str] = [
            f"Experiment: {outcome.name} ({outcome.kind})",
            outcome.description,
            f"Status: {status}",
            "",
        ]

        if outcome.checks:
            lines.append("Checks:")
            lines.extend(f"  {check}" for check in outcome.checks)
            lines.append("")

        if outcome.metrics:
            lines.append("Metrics:")
            for key in sorted(outcome.metrics):
                lines.append(f"  {key} = {cls._format_metric(outcome.metrics[key])}")
            lines.append("")

        if outcome.notes:
            lines.append("Notes:")
            lines.extend(f"  - {note}" for note in outcome.notes)
            lines.append("")

        if outcome.tables:
            lines.append("Attachments: " + ", ".join(sorted(cls.attachment_name(name) for name in outcome.tables)))

        return "\n".join(lines).rstrip() + "\n"

    @staticmethod
    def _format_metric(value: Any) -> str:
        if isinstance(value, bool) or value is None:
            return str(value)
        if isinstance(value, (float, np.floating)):
            return f"{float(value):.6g}"
        if isinstance(value, (list, tuple, np.ndarray)):
            return "[" + ", ".join(f"{float(item):.6g}" for item in value) + "]"
        return str(value)
