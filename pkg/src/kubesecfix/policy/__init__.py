"""Misconfiguration detection: check registry, scan engine, external adapter."""

from kubesecfix.policy.builtin import builtin_policy_root
from kubesecfix.policy.engine import (
    PolicyEngine,
    ReportDiff,
    diff_reports,
    render_report_text,
)
from kubesecfix.policy.model import (
    CheckDefinition,
    CheckResult,
    CheckScope,
    Finding,
    ReportSource,
    ScanReport,
)
from kubesecfix.policy.registry import CheckRegistry, DuplicateCheckIdError, register_builtin_checks

__all__ = [
    "CheckDefinition",
    "CheckRegistry",
    "CheckResult",
    "CheckScope",
    "DuplicateCheckIdError",
    "Finding",
    "PolicyEngine",
    "ReportDiff",
    "ReportSource",
    "ScanReport",
    "builtin_policy_root",
    "diff_reports",
    "register_builtin_checks",
    "render_report_text",
]
