"""
Deterministic report files.

``report.json`` holds every computed number with sorted keys and floats
fixed at 17 significant digits, so identical runs give identical bytes;
``report.txt`` is the human summary of the same checks.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

import numpy as np

logger = logging.getLogger(__name__)


def _float(x: float) -> Union[float, str]:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def format_float(x: float) -> str:
    """Render a float with 17 significant digits (``0.1`` is ``0.10000000000000001``)."""
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


class FixedPrecisionEncoder(json.JSONEncoder):
    """JSON encoder that writes every float through :func:`format_float`."""

    def iterencode(self, o: Any, _one_shot: bool = False) -> Iterator[str]:
        markers: Optional[Dict[int, Any]] = {} if self.check_circular else None
        encoder = json.encoder.encode_basestring_ascii if self.ensure_ascii else json.encoder.encode_basestring
        indent = " " * self.indent if isinstance(self.indent, int) else self.indent
        return json.encoder._make_iterencode(  # type: ignore[attr-defined]
            markers,
            self.default,
            encoder,
            indent,
            format_float,
            self.key_separator,
            self.item_separator,
            self.sort_keys,
            self.skipkeys,
            _one_shot,
        )(o, 0)


def to_jsonable(value: Any) -> Any:
    """Convert numpy values, tuples and nested containers to plain JSON data."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return _float(float(value))
    return value


@dataclass
class Check:
    """One pass/fail comparison of a computed value against a tolerance."""

    name: str
    value: float
    tolerance: float
    passed: bool
    detail: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def at_most(cls, name: str, value: float, tolerance: float, **detail: Any) -> "Check":
        return cls(name, float(value), float(tolerance), bool(value <= tolerance), detail)

    @classmethod
    def holds(cls, name: str, ok: bool, **detail: Any) -> "Check":
        return cls(name, 0.0 if ok else 1.0, 0.0, bool(ok), detail)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "value": self.value,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "detail": self.detail,
        }


@dataclass
class Report:
    """Everything one ``holab`` run computed."""

    scenario: str
    kind: str
    command: str
    seed: int
    tolerances: Dict[str, float]
    results: Dict[str, Any] = field(default_factory=dict)
    checks: List[Check] = field(default_factory=list)
    errors: List[Dict[str, str]] = field(default_factory=list)
    skipped: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        if not check.passed:
            logger.warning("check %s failed: %.3e > %.1e", check.name, check.value, check.tolerance)
        return check

    def error(self, command: str, exc: Exception) -> None:
        logger.error("%s failed: %s", command, exc)
        self.errors.append({"command": command, "type": type(exc).__name__, "message": str(exc)})

    def as_dict(self) -> Dict[str, Any]:
        return to_jsonable({
            "scenario": self.scenario,
            "kind": self.kind,
            "command": self.command,
            "seed": self.seed,
            "tolerances": self.tolerances,
            "results": self.results,
            "checks": [c.as_dict() for c in self.checks],
            "errors": self.errors,
            "skipped": self.skipped,
            "passed": self.passed,
        })


def render_json(report: Report) -> str:
    return json.dumps(
        report.as_dict(), cls=FixedPrecisionEncoder, indent=2, sort_keys=True, ensure_ascii=False
    ) + "\n"


def render_text(report: Report) -> str:
    lines = [
        f"scenario: {report.scenario} ({report.kind})",
        f"command:  {report.command}",
        f"seed:     {report.seed}",
        "",
    ]
    width = max((len(c.name) for c in report.checks), default=10)
    for check in report.checks:
        mark = "PASS" if check.passed else "FAIL"
        lines.append(f"  [{mark}] {check.name:<{width}}  {check.value:.3e}  (tol {check.tolerance:.1e})")
    for name in report.skipped:
        lines.append(f"  [SKIP] {name}")
    for error in report.errors:
        lines.append(f"  [ERROR] {error['command']}: {error['type']}: {error['message']}")
    failed = sum(not c.passed for c in report.checks)
    lines.append("")
    lines.append(
        f"{len(report.checks)} checks, {failed} failed, {len(report.errors)} errors: "
        + ("PASS" if report.passed else "FAIL")
    )
    return "\n".join(lines) + "\n"


def write_report(report: Report, out_dir: Optional[Union[str, Path]] = None) -> Path:
    """Write report.json and report.txt into ``out_dir`` (created if missing)."""
    directory = Path(out_dir) if out_dir is not None else Path.cwd()
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "report.json").write_text(render_json(report), encoding="utf-8")
    (directory / "report.txt").write_text(render_text(report), encoding="utf-8")
    logger.info("wrote report to %s", directory)
    return directory
