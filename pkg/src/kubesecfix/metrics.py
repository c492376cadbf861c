"""Repair-quality metrics over completed sessions.

Seven corpus-level metrics: parse success rate, pass rate, average pass
steps, the two step-wise area-under-curve aggregates, security improvement
and average introduced errors.  Everything here is a pure function over
immutable records, so live runs and log replays produce identical numbers.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, NamedTuple

from kubesecfix.policy.engine import diff_reports
from kubesecfix.policy.model import ScanReport
from kubesecfix.repair import RepairSession, SessionStatus

logger = logging.getLogger(__name__)


class EvaluationError(Exception):
    """Metric is undefined for the given record set."""


class CheckOutcome(Enum):
    FIXED_ALL = "FixedAll"
    PARTIAL = "Partial"
    NONE = "None"


@dataclass(frozen=True)
class EvaluationRecord:
    """Per-configuration outcome of one repair session.

    ``parse_ok`` is per configuration: false only when the session exhausted
    parse retries.  ``steps`` is set iff the session passed. ``e_final`` and
    ``e_new`` come from the last parsed candidate's scan; with no parsed
    candidate at all the input stands, so ``e_final == e_init`` and
    ``e_new == 0``.
    """

    config_id: str
    parse_ok: bool
    pass_ok: bool
    steps: int | None
    e_init: int
    e_final: int
    e_new: int
    per_check_outcomes: Mapping[str, CheckOutcome]
    introduced_check_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class StepTrace:
    """Failed-finding counts per validated attempt of one session."""

    config_id: str
    per_step_failed_counts: tuple[int, ...]
    pass_step: int | None


class CategoryRow(NamedTuple):
    attempted: int
    fixed: int
    introduced: int


def _final_report(session: RepairSession) -> ScanReport | None:
    """Scan of the last parsed candidate, or None when nothing ever parsed."""
    for attempt in reversed(session.attempts):
        if attempt.validation_report is not None:
            return attempt.validation_report
    return None


def evaluation_record(session: RepairSession, config_id: str) -> EvaluationRecord:
    parse_ok = session.status is not SessionStatus.PARSE_EXHAUSTED
    pass_ok = session.status is SessionStatus.PASSED
    initial = session.initial_report
    final = _final_report(session)
    if final is None:
        final = initial

    diff = diff_reports(initial, final)
    initial_counts: dict[str, int] = {}
    for check_id, _ in initial.failed_keys():
        initial_counts[check_id] = initial_counts.get(check_id, 0) + 1
    final_counts: dict[str, int] = {}
    for check_id, _ in final.failed_keys():
        final_counts[check_id] = final_counts.get(check_id, 0) + 1

    outcomes: dict[str, CheckOutcome] = {}
    for check_id, init_n in initial_counts.items():
        fin_n = final_counts.get(check_id, 0)
        if fin_n == 0:
            outcomes[check_id] = CheckOutcome.FIXED_ALL
        elif fin_n < init_n:
            outcomes[check_id] = CheckOutcome.PARTIAL
        else:
            outcomes[check_id] = CheckOutcome.NONE

    return EvaluationRecord(
        config_id=config_id,
        parse_ok=parse_ok,
        pass_ok=pass_ok,
        steps=session.pass_step if pass_ok else None,
        e_init=len(initial.failed_keys()),
        e_final=len(final.failed_keys()),
        e_new=len(diff.introduced),
        per_check_outcomes=outcomes,
        introduced_check_ids=tuple(sorted({check_id for check_id, _ in diff.introduced})),
    )


def step_trace(session: RepairSession, config_id: str) -> StepTrace:
    counts = tuple(
        attempt.validation_report.failed_count
        for attempt in session.attempts
        if attempt.validation_report is not None
    )
    return StepTrace(config_id=config_id, per_step_failed_counts=counts, pass_step=session.pass_step)


def compute_psr(records: Iterable[EvaluationRecord]) -> float:
    """Parse success rate: 100 x (configs whose sessions parsed) / N."""
    records = list(records)
    if not records:
        raise EvaluationError("parse success rate is undefined for zero records")
    return 100.0 * sum(1 for r in records if r.parse_ok) / len(records)


def compute_pr(records: Iterable[EvaluationRecord]) -> float:
    """Pass rate: 100 x (configs passing all active checks) / N."""
    records = list(records)
    if not records:
        raise EvaluationError("pass rate is undefined for zero records")
    return 100.0 * sum(1 for r in records if r.pass_ok) / len(records)


def compute_aps(records: Iterable[EvaluationRecord]) -> float:
    """Average pass steps over passing configurations only."""
    steps = [r.steps for r in records if r.pass_ok and r.steps is not None]
    if not steps:
        raise EvaluationError("average pass steps is undefined with zero passing records")
    return sum(steps) / len(steps)


def _pass_fraction(traces: list[StepTrace], t: int) -> float:
    if not traces:
        return 0.0
    passed = sum(1 for tr in traces if tr.pass_step is not None and tr.pass_step <= t)
    return passed / len(traces)


def _aps_at(traces: list[StepTrace], t: int) -> float:
    # By convention 0.0 when no configuration has passed within t steps;
    # the ratio is otherwise 0/0.
    steps = [tr.pass_step for tr in traces if tr.pass_step is not None and tr.pass_step <= t]
    if not steps:
        return 0.0
    return sum(steps) / len(steps)


def compute_auc_prs(traces: Iterable[StepTrace], max_steps: int) -> float:
    """Step-averaged pass rate: (1/T) sum of PR_t for t = 1..T, as a 0-1 fraction."""
    traces = list(traces)
    if max_steps < 1:
        raise EvaluationError("max_steps must be at least 1")
    return sum(_pass_fraction(traces, t) for t in range(1, max_steps + 1)) / max_steps


def compute_auc_apss(traces: Iterable[StepTrace], max_steps: int) -> float:
    """Step-averaged APS: (1/T) sum of APS_t for t = 1..T."""
    traces = list(traces)
    if max_steps < 1:
        raise EvaluationError("max_steps must be at least 1")
    return sum(_aps_at(traces, t) for t in range(1, max_steps + 1)) / max_steps


def security_improvement(records: Iterable[EvaluationRecord]) -> float:
    """Normalized reduction in failed findings: sum(e_init - e_final) / sum(e_init)."""
    records = list(records)
    total_init = sum(r.e_init for r in records)
    if total_init == 0:
        raise EvaluationError("security improvement is undefined when no initial issues exist")
    return sum(r.e_init - r.e_final for r in records) / total_init


def avg_introduced_errors(records: Iterable[EvaluationRecord]) -> float:
    """Mean count of newly introduced failed findings per configuration."""
    records = list(records)
    if not records:
        raise EvaluationError("average introduced errors is undefined for zero records")
    return sum(r.e_new for r in records) / len(records)


def per_category_report(records: Iterable[EvaluationRecord]) -> dict[str, CategoryRow]:
    """Per check id: configs where it failed initially, was fully fixed, or newly appeared."""
    attempted: dict[str, int] = {}
    fixed: dict[str, int] = {}
    introduced: dict[str, int] = {}
    for record in records:
        for check_id, outcome in record.per_check_outcomes.items():
            attempted[check_id] = attempted.get(check_id, 0) + 1
            if outcome is CheckOutcome.FIXED_ALL:
                fixed[check_id] = fixed.get(check_id, 0) + 1
        for check_id in record.introduced_check_ids:
            introduced[check_id] = introduced.get(check_id, 0) + 1
    rows: dict[str, CategoryRow] = {}
    for check_id in sorted(set(attempted) | set(introduced)):
        rows[check_id] = CategoryRow(
            attempted=attempted.get(check_id, 0),
            fixed=fixed.get(check_id, 0),
            introduced=introduced.get(check_id, 0),
        )
    return rows


def step_curves(traces: Iterable[StepTrace], max_steps: int) -> tuple[list[float], list[float]]:
    """PR_t and APS_t series for t = 1..T, as tabular plot data."""
    traces = list(traces)
    pr_series = [_pass_fraction(traces, t) for t in range(1, max_steps + 1)]
    aps_series = [_aps_at(traces, t) for t in range(1, max_steps + 1)]
    return pr_series, aps_series


@dataclass(frozen=True)
class MetricsSummary:
    """Corpus-level metric values for one run."""

    n: int
    pr: float
    psr: float
    aps: float | None
    auc_prs: float
    auc_apss: float
    sec_improvement: float | None
    avg_introduced_errors: float
    max_steps: int

    def to_dict(self) -> dict:
        return {
            "N": self.n,
            "PR": self.pr,
            "PSR": self.psr,
            "APS": self.aps,
            "AUC_PRS": self.auc_prs,
            "AUC_APSS": self.auc_apss,
            "SecImp": self.sec_improvement,
            "AvgIntroErr": self.avg_introduced_errors,
            "T": self.max_steps,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def _fmt(value: float | None, digits: int = 3) -> str:
        return "n/a" if value is None else f"{value:.{digits}f}"

    def table_header(self) -> str:
        return (
            f"{'PR(%)':>8} {'PSR(%)':>8} {'APS':>6} {'AUC_PRS':>8} "
            f"{'AUC_APSS':>9} {'SecImp':>7} {'AvgIntroErr':>12}"
        )

    def table_row(self) -> str:
        return (
            f"{self.pr:>8.1f} {self.psr:>8.1f} {self._fmt(self.aps, 2):>6} "
            f"{self.auc_prs:>8.3f} {self.auc_apss:>9.3f} "
            f"{self._fmt(self.sec_improvement):>7} {self.avg_introduced_errors:>12.3f}"
        )


def summarize(
    records: Iterable[EvaluationRecord],
    traces: Iterable[StepTrace],
    max_steps: int,
) -> MetricsSummary:
    """Compute every metric; APS and SecImp may be absent when undefined."""
    records = list(records)
    traces = list(traces)
    if not records:
        raise EvaluationError("cannot summarize zero records")
    try:
        aps: float | None = compute_aps(records)
    except EvaluationError:
        aps = None
    try:
        sec_imp: float | None = security_improvement(records)
    except EvaluationError:
        sec_imp = None
    return MetricsSummary(
        n=len(records),
        pr=compute_pr(records),
        psr=compute_psr(records),
        aps=aps,
        auc_prs=compute_auc_prs(traces, max_steps),
        auc_apss=compute_auc_apss(traces, max_steps),
        sec_improvement=sec_imp,
        avg_introduced_errors=avg_introduced_errors(records),
        max_steps=max_steps,
    )
