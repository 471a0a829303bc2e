"""
Run reports: verdicts, artifact manifest, timings and the config echo.
"""

import json
import time
from contextlib import contextmanager
from enum import IntEnum, StrEnum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field, field_validator

from ..log_utils import get_logger

logger = get_logger(__name__)

REPORT_FILE = "run_report.json"
SUMMARY_FILE = "summary.md"


class ExitCode(IntEnum):
    PASSED = 0
    FAILED = 1
    INVALID = 2


class TheoremTag(StrEnum):
    """Properties a verdict can test. Every verdict names exactly one."""

    DERIVATIVES = "field.derivatives"
    PARSER = "field.parser_round_trip"
    INTEGRATOR = "flow.closed_form"
    DISSIPATION = "flow.dissipation"
    CLASSIFICATION = "morse.classification"
    ALMOST_ALL = "flow.almost_all_convergence"
    ENTER_ONCE = "flow.enter_once"
    UNIFORM_LENGTH = "flow.uniform_length"
    CONNECTIONS = "morse.connection_dimension"
    LEVEL_CROSSING = "morse.level_crossing"
    RESTRICTION = "morse.restriction_extremum"
    NORMAL_HESSIAN = "bott.normal_hessian"
    BOTT_DIMENSION = "bott.connection_dimension"
    EXPONENTIAL = "bott.exponential_decay"
    LOJASIEWICZ = "loja.inequality"
    DISTANCE = "loja.distance_inequality"
    RATE = "loja.convergence_rate"
    FULL_CONVERGENCE = "loja.full_convergence"
    EXPONENT_STABILITY = "loja.exponent_stability"
    NORMAL_BIAS = "loja.normal_bias"
    SECANT = "loja.secant_limit"
    Z_SET = "loja.z_set"
    DENSE_LIMITS = "loja.dense_limits"
    REPRODUCIBILITY = "runner.reproducibility"
    COVERAGE = "runner.coverage"


# tags `verify` must exercise; the coverage verdict itself is excluded
IN_SCOPE_TAGS = frozenset(t for t in TheoremTag if t != TheoremTag.COVERAGE)


def _plain(value: Any) -> Any:
    """numpy scalars and arrays to JSON-friendly Python values."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


class Verdict(BaseModel):
    """One pass/fail outcome with what was measured and what it was held to."""

    name: str
    tag: TheoremTag
    passed: bool
    measured: Any = None
    threshold: Any = None
    message: str = ""

    @field_validator("measured", "threshold", mode="before")
    @classmethod
    def _jsonable(cls, v: Any) -> Any:
        return _plain(v)


class RunReport(BaseModel):
    """
    Outcome of one CLI run.

    Attributes:
        command: Subcommand that produced the report
        verdicts: Pass/fail results in the order they were produced
        artifacts: Files written, relative to the output directory
        timings: Wall-clock seconds per stage
        config: Echo of the validated config
        errors: Runtime errors recorded instead of raised
    """

    command: str
    verdicts: List[Verdict] = Field(default_factory=list)
    artifacts: List[str] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)
    config: Dict[str, Any] = Field(default_factory=dict)
    errors: List[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and all(v.passed for v in self.verdicts)

    @property
    def exit_code(self) -> ExitCode:
        return ExitCode.PASSED if self.passed else ExitCode.FAILED

    @property
    def tags(self) -> set:
        return {v.tag for v in self.verdicts}

    def add(
        self,
        name: str,
        tag: TheoremTag,
        passed: bool,
        measured: Any = None,
        threshold: Any = None,
        message: str = "",
    ) -> Verdict:
        verdict = Verdict(
            name=name, tag=tag, passed=bool(passed), measured=measured, threshold=threshold, message=message
        )
        self.verdicts.append(verdict)
        log = logger.info if verdict.passed else logger.warning
        log("%s [%s]: %s", name, tag, "pass" if verdict.passed else "FAIL")
        return verdict

    def record_error(self, name: str, tag: TheoremTag, error: Exception) -> Verdict:
        """Record a runtime failure as a failed verdict."""
        self.errors.append(f"{name}: {error}")
        return self.add(name, tag, False, message=str(error))

    def record_artifact(self, path: Union[str, Path], out_dir: Union[str, Path]) -> Path:
        path = Path(path)
        rel = path.relative_to(Path(out_dir)).as_posix()
        if rel not in self.artifacts:
            self.artifacts.append(rel)
        return path

    @contextmanager
    def timed(self, stage: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[stage] = round(time.perf_counter() - start, 6)

    def missing_artifacts(self, out_dir: Union[str, Path]) -> List[str]:
        return [a for a in self.artifacts if not (Path(out_dir) / a).is_file()]

    def write(self, out_dir: Union[str, Path]) -> Path:
        """Write run_report.json and summary.md into out_dir."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        missing = self.missing_artifacts(out)
        if missing:
            logger.warning("Artifacts listed but not written: %s", ", ".join(missing))
        path = out / REPORT_FILE
        path.write_text(json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n")
        write_summary(self, out / SUMMARY_FILE)
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "RunReport":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    text = json.dumps(value) if isinstance(value, (list, dict)) else str(value)
    return text if len(text) <= 60 else text[:57] + "..."


def render_summary(report: RunReport) -> str:
    """Markdown table of the verdicts."""
    failed = sum(not v.passed for v in report.verdicts)
    status = "PASS" if report.passed else "FAIL"
    lines = [
        f"# morselab {report.command}: {status}",
        "",
        f"{len(report.verdicts)} verdicts, {failed} failed, {len(report.artifacts)} artifacts.",
        "",
        "| verdict | tag | result | measured | threshold |",
        "|---|---|---|---|---|",
    ]
    for v in report.verdicts:
        result = "pass" if v.passed else "FAIL"
        lines.append(f"| {v.name} | {v.tag} | {result} | {_cell(v.measured)} | {_cell(v.threshold)} |")
    if report.errors:
        lines += ["", "## Errors", ""] + [f"- {e}" for e in report.errors]
    return "\n".join(lines) + "\n"


def write_summary(report: RunReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(render_summary(report), encoding="utf-8")
    return path


def regenerate_summaries(root: Union[str, Path]) -> List[Path]:
    """Rewrite summary.md next to every run_report.json below root, in sorted order."""
    written = []
    for report_path in sorted(Path(root).rglob(REPORT_FILE)):
        report = RunReport.load(report_path)
        written.append(write_summary(report, report_path.parent / SUMMARY_FILE))
    return written


def coverage_verdict(report: RunReport, required: Optional[frozenset] = None) -> Verdict:
    """Fail when any in-scope tag has no verdict yet."""
    required = IN_SCOPE_TAGS if required is None else required
    missing = sorted(str(t) for t in required - report.tags)
    return report.add(
        "tag coverage",
        TheoremTag.COVERAGE,
        not missing,
        measured=len(required) - len(missing),
        threshold=len(required),
        message=("untested: " + ", ".join(missing)) if missing else "",
    )


def write_json(path: Union[str, Path], data: Any) -> Path:
    """Deterministic JSON artifact: sorted keys, numpy values converted."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_plain(data), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
