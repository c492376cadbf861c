"""Core types of the misconfiguration check engine."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from kubesecfix.manifest import ResourceRef

CHECK_ID_PATTERN = re.compile(r"^CKV_K8S_\d+$")


class CheckResult(Enum):
    PASSED = "Passed"
    FAILED = "Failed"
    SKIPPED = "Skipped"


class CheckScope(Enum):
    """What part of a resource a check's predicate receives."""

    CONTAINER = "Container"
    POD_SPEC = "PodSpec"
    RESOURCE = "Resource"


class ReportSource(Enum):
    EMBEDDED = "Embedded"
    EXTERNAL = "External"


# A predicate inspects one configuration fragment (container entry, pod spec
# or whole resource body, per scope) and must tolerate arbitrary junk input.
CheckPredicate = Callable[[Any], CheckResult]


@dataclass(frozen=True)
class CheckDefinition:
    """One security policy: a stable id plus a pure verdict predicate."""

    id: str
    name: str
    guideline_url: str
    scope: CheckScope
    evaluated_keys: tuple[str, ...]
    predicate: CheckPredicate

    def __post_init__(self) -> None:
        if not CHECK_ID_PATTERN.match(self.id):
            raise ValueError(f"check id {self.id!r} does not match CKV_K8S_<digits>")
        if not self.evaluated_keys:
            raise ValueError(f"check {self.id} must declare evaluated keys")


@dataclass(frozen=True)
class Finding:
    """One (check, resource) verdict.

    Identity for report diffing is ``(check_id, str(resource))``; spans are
    deliberately excluded so that a repair that merely shifts lines does not
    read as a new issue.
    """

    check_id: str
    check_name: str
    result: CheckResult
    resource: ResourceRef
    file: str
    span: tuple[int, int]
    guideline_url: str
    severity: str | None = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.check_id, str(self.resource))


FindingKey = tuple[str, str]


def _finding_sort_key(finding: Finding) -> tuple[str, str, str]:
    return (finding.file, str(finding.resource), finding.check_id)


@dataclass(frozen=True)
class ScanReport:
    """Aggregate of findings for one logical configuration.

    Findings are kept in deterministic (file, resource, check_id) order;
    the three counts are always consistent with the findings themselves.
    """

    findings: tuple[Finding, ...]
    source: ReportSource = ReportSource.EMBEDDED

    @classmethod
    def build(
        cls, findings: list[Finding] | tuple[Finding, ...], source: ReportSource = ReportSource.EMBEDDED
    ) -> "ScanReport":
        return cls(findings=tuple(sorted(findings, key=_finding_sort_key)), source=source)

    @property
    def passed_count(self) -> int:
        return sum(1 for f in self.findings if f.result is CheckResult.PASSED)

    @property
    def failed_count(self) -> int:
        return sum(1 for f in self.findings if f.result is CheckResult.FAILED)

    @property
    def skipped_count(self) -> int:
        return sum(1 for f in self.findings if f.result is CheckResult.SKIPPED)

    def failed_findings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.result is CheckResult.FAILED)

    def failed_keys(self) -> frozenset[FindingKey]:
        return frozenset(f.key for f in self.failed_findings())
