"""Adapter around the external static-analysis tool (checkov).

The tool is optional: its absence is a detectable capability, not an error.
We always request the structured JSON output and never parse the compact
text format, which exists for humans and prompt context only.
"""

from __future__ import annotations

import json
import logging
import shutil
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from kubesecfix.manifest import ResourceRef
from kubesecfix.policy.model import CheckResult, Finding, ReportSource, ScanReport

logger = logging.getLogger(__name__)

DEFAULT_EXECUTABLE = "checkov"
DEFAULT_TIMEOUT = 120.0


class ExternalScanError(Exception):
    """External tool invocation failed; carries captured output for diagnosis."""

    def __init__(self, message: str, stdout: str = "", stderr: str = ""):
        super().__init__(message)
        self.stdout = stdout
        self.stderr = stderr


@dataclass(frozen=True)
class ExternalToolCapability:
    available: bool
    executable: str | None = None
    reason: str | None = None


def detect_external_tool(executable: str = DEFAULT_EXECUTABLE) -> ExternalToolCapability:
    resolved = shutil.which(executable)
    if resolved is None:
        return ExternalToolCapability(False, None, f"{executable!r} not found on PATH")
    return ExternalToolCapability(True, resolved, None)


def _parse_resource(resource: str) -> ResourceRef:
    parts = resource.split(".")
    if len(parts) >= 3:
        return ResourceRef(kind=parts[0], namespace=parts[1], name=".".join(parts[2:]))
    if len(parts) == 2:
        return ResourceRef(kind=parts[0], name=parts[1])
    return ResourceRef(kind=resource or "<unknown>")


def _result_sections(payload: Any) -> list[dict[str, Any]]:
    # Single-framework runs produce a dict; multi-framework runs a list.
    if isinstance(payload, dict):
        return [payload]
    if isinstance(payload, list):
        return [p for p in payload if isinstance(p, dict)]
    return []


def _findings_from_payload(payload: Any, fallback_file: str) -> list[Finding]:
    findings: list[Finding] = []
    buckets = {
        "passed_checks": CheckResult.PASSED,
        "failed_checks": CheckResult.FAILED,
        "skipped_checks": CheckResult.SKIPPED,
    }
    for section in _result_sections(payload):
        results = section.get("results")
        if not isinstance(results, dict):
            continue
        for bucket, verdict in buckets.items():
            for entry in results.get(bucket) or []:
                if not isinstance(entry, dict):
                    continue
                line_range = entry.get("file_line_range") or [1, 1]
                findings.append(
                    Finding(
                        check_id=str(entry.get("check_id", "")),
                        check_name=str(entry.get("check_name", "")),
                        result=verdict,
                        resource=_parse_resource(str(entry.get("resource", ""))),
                        file=str(entry.get("file_path", fallback_file)),
                        span=(int(line_range[0]), int(line_range[1])),
                        guideline_url=str(entry.get("guideline") or ""),
                        severity=entry.get("severity"),
                    )
                )
    return findings


def scan_external(
    path: str | Path,
    check_ids: set[str] | frozenset[str] | None = None,
    executable: str = DEFAULT_EXECUTABLE,
    timeout: float = DEFAULT_TIMEOUT,
) -> ScanReport:
    """Scan one file with the external tool and parse its JSON report.

    Raises :class:`ExternalScanError` when the tool is missing, times out,
    or exits abnormally with unparseable output.  Exit code 1 just means
    findings were present and is not an error.
    """
    capability = detect_external_tool(executable)
    if not capability.available:
        raise ExternalScanError(capability.reason or "external tool unavailable")

    cmd = [
        capability.executable or executable,
        "-f",
        str(path),
        "--compact",
        "--framework",
        "kubernetes",
        "--quiet",
        "-o",
        "json",
    ]
    if check_ids:
        cmd.extend(["-c", ",".join(sorted(check_ids))])

    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired as exc:
        raise ExternalScanError(f"external scan timed out after {timeout}s") from exc

    try:
        payload = json.loads(proc.stdout)
    except json.JSONDecodeError as exc:
        if proc.returncode not in (0, 1):
            raise ExternalScanError(
                f"external tool exited {proc.returncode} with unparseable output",
                stdout=proc.stdout,
                stderr=proc.stderr,
            ) from exc
        # Zero findings on some versions produce empty output.
        payload = {}

    findings = _findings_from_payload(payload, fallback_file=str(path))
    return ScanReport.build(findings, source=ReportSource.EXTERNAL)
