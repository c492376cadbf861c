"""Persisted session logs: line-delimited records, one file per configuration.

A log is complete iff it ends with a ``session_end`` record; metric replay
reads only complete logs, so a killed batch run loses at most its in-flight
sessions.  Logs carry enough to rebuild every report and attempt exactly.
"""

from __future__ import annotations

import json
import logging
import os
from pathlib import Path
from typing import Any

from kubesecfix.context import ContextVariant, RepairContext
from kubesecfix.policy.engine import findings_to_records, report_from_records
from kubesecfix.policy.model import ScanReport
from kubesecfix.repair import AttemptRecord, RepairSession, SessionStatus

logger = logging.getLogger(__name__)

LOG_SUFFIX = ".log.jsonl"


class IncompleteLogError(Exception):
    """Session log has no terminal record and cannot be replayed."""


def _report_to_dict(report: ScanReport) -> dict[str, Any]:
    return {"source": report.source.value, "findings": findings_to_records(report)}


def _report_from_dict(data: dict[str, Any]) -> ScanReport:
    return report_from_records(data["findings"], source=data.get("source", "Embedded"))


def _context_to_dict(context: RepairContext) -> dict[str, Any]:
    return {
        "variant": context.variant.value,
        "scan_text": context.scan_text,
        "policy_sources": [list(pair) for pair in context.policy_sources],
        "guideline_texts": [list(pair) for pair in context.guideline_texts],
    }


def _context_from_dict(data: dict[str, Any]) -> RepairContext:
    return RepairContext(
        scan_text=data["scan_text"],
        policy_sources=tuple((c, t) for c, t in data.get("policy_sources", [])),
        guideline_texts=tuple((c, t) for c, t in data.get("guideline_texts", [])),
        variant=ContextVariant.from_string(data["variant"]),
    )


def session_to_lines(
    session: RepairSession, config_id: str, run_id: str, policy_snapshot: dict[str, Any]
) -> list[dict[str, Any]]:
    lines: list[dict[str, Any]] = [
        {
            "type": "session_start",
            "run_id": run_id,
            "config_id": config_id,
            "input_path": session.input_path,
            "provider_identity": session.provider_identity,
            "policy": policy_snapshot,
            "initial_report": _report_to_dict(session.initial_report),
        }
    ]
    for attempt in session.attempts:
        lines.append(
            {
                "type": "attempt",
                "attempt_index": attempt.attempt_index,
                "context": _context_to_dict(attempt.context_snapshot),
                "prompt": attempt.prompt,
                "raw_responses": attempt.raw_responses,
                "accepted_candidate": attempt.accepted_candidate,
                "parse_retries_used": attempt.parse_retries_used,
                "validation_report": (
                    _report_to_dict(attempt.validation_report)
                    if attempt.validation_report is not None
                    else None
                ),
            }
        )
    lines.append(
        {
            "type": "session_end",
            "status": session.status.value,
            "pass_step": session.pass_step,
            "final_config": session.final_config,
            "error": session.error,
        }
    )
    return lines


def write_session_log(
    path: str | Path,
    session: RepairSession,
    config_id: str,
    run_id: str,
    policy_snapshot: dict[str, Any],
) -> None:
    """Write the session log atomically (tmp file + rename)."""
    path = Path(path)
    payload = "".join(
        json.dumps(line, sort_keys=True, ensure_ascii=False) + "\n"
        for line in session_to_lines(session, config_id, run_id, policy_snapshot)
    )
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(payload, encoding="utf-8")
    os.replace(tmp, path)


def read_session_log(path: str | Path) -> tuple[str, RepairSession, dict[str, Any]]:
    """Rebuild (config_id, session, policy snapshot) from one log file."""
    records = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    if not records or records[0].get("type") != "session_start":
        raise IncompleteLogError(f"{path}: missing session_start record")
    if records[-1].get("type") != "session_end":
        raise IncompleteLogError(f"{path}: missing session_end record")

    start = records[0]
    end = records[-1]
    attempts = []
    for rec in records[1:-1]:
        if rec.get("type") != "attempt":
            continue
        attempts.append(
            AttemptRecord(
                attempt_index=rec["attempt_index"],
                context_snapshot=_context_from_dict(rec["context"]),
                prompt=rec["prompt"],
                raw_responses=list(rec.get("raw_responses", [])),
                accepted_candidate=rec.get("accepted_candidate"),
                parse_retries_used=rec.get("parse_retries_used", 0),
                validation_report=(
                    _report_from_dict(rec["validation_report"])
                    if rec.get("validation_report") is not None
                    else None
                ),
            )
        )
    session = RepairSession(
        input_path=start["input_path"],
        initial_report=_report_from_dict(start["initial_report"]),
        attempts=attempts,
        status=SessionStatus(end["status"]),
        final_config=end.get("final_config"),
        pass_step=end.get("pass_step"),
        error=end.get("error"),
        provider_identity=start.get("provider_identity", ""),
    )
    return start["config_id"], session, start.get("policy", {})


def load_run_sessions(run_dir: str | Path) -> list[tuple[str, RepairSession, dict[str, Any]]]:
    """Load all complete session logs of a run, sorted by config id."""
    run_dir = Path(run_dir)
    loaded = []
    for path in sorted(run_dir.glob(f"*{LOG_SUFFIX}")):
        try:
            loaded.append(read_session_log(path))
        except IncompleteLogError as exc:
            logger.warning("skipping incomplete session log: %s", exc)
    loaded.sort(key=lambda item: item[0])
    return loaded
