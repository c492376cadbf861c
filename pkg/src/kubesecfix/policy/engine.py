"""Scan engine: run checks over documents, render and diff reports.

Scanning is pure: the same document always yields the same report.  Workload
kinds (Deployment, StatefulSet, DaemonSet, Job) are unwrapped through
``spec.template.spec``; CronJob through ``spec.jobTemplate.spec.template.spec``.
Container-scope checks look at every entry of ``containers`` and
``initContainers`` and fail the resource if any entry fails, mirroring how
the external scanner reports one verdict per (check, resource).
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Iterable, NamedTuple

from kubesecfix.manifest import ManifestDocument, parse_stream, resource_ref
from kubesecfix.policy.model import (
    CheckDefinition,
    CheckResult,
    CheckScope,
    Finding,
    FindingKey,
    ReportSource,
    ScanReport,
)
from kubesecfix.policy.registry import CheckRegistry

logger = logging.getLogger(__name__)

TEMPLATE_KINDS = frozenset({"Deployment", "StatefulSet", "DaemonSet", "Job"})
SKIP_ANNOTATION_PREFIX = "checkov.io/skip"


def _pod_spec(body: dict[str, Any]) -> dict[str, Any] | None:
    kind = body.get("kind")
    spec = body.get("spec")
    if not isinstance(spec, dict):
        return None
    if kind == "Pod":
        return spec
    if kind in TEMPLATE_KINDS:
        template = spec.get("template")
        if isinstance(template, dict) and isinstance(template.get("spec"), dict):
            return template["spec"]
        return None
    if kind == "CronJob":
        job_template = spec.get("jobTemplate")
        if isinstance(job_template, dict):
            job_spec = job_template.get("spec")
            if isinstance(job_spec, dict):
                template = job_spec.get("template")
                if isinstance(template, dict) and isinstance(template.get("spec"), dict):
                    return template["spec"]
        return None
    return None


def _containers(pod_spec: dict[str, Any]) -> list[Any]:
    entries: list[Any] = []
    for key in ("containers", "initContainers"):
        value = pod_spec.get(key)
        if isinstance(value, list):
            entries.extend(value)
    return entries


def _skipped_check_ids(body: dict[str, Any]) -> set[str]:
    metadata = body.get("metadata")
    if not isinstance(metadata, dict):
        return set()
    annotations = metadata.get("annotations")
    if not isinstance(annotations, dict):
        return set()
    skipped: set[str] = set()
    for key, value in annotations.items():
        if isinstance(key, str) and key.startswith(SKIP_ANNOTATION_PREFIX) and isinstance(value, str):
            skipped.add(value.split("=", 1)[0].strip())
    return skipped


class PolicyEngine:
    """Runs registered checks over parsed documents."""

    def __init__(self, registry: CheckRegistry):
        self.registry = registry

    def scan_document(
        self, doc: ManifestDocument, check_filter: frozenset[str] | set[str] | None = None
    ) -> ScanReport:
        """Scan one resource document; an empty filter means all checks.

        ``List`` wrappers are traversed item by item, so scanning a wrapper
        and scanning its split units yield the same findings.
        """
        body = doc.body
        if body.get("kind") == "List" and isinstance(body.get("items"), list):
            findings = []
            for item in body["items"]:
                if not isinstance(item, dict):
                    continue
                child = ManifestDocument(
                    body=item, source_path=doc.source_path, span=doc.span, doc_index=doc.doc_index
                )
                findings.extend(self.scan_document(child, check_filter).findings)
            return ScanReport.build(findings)

        findings: list[Finding] = []
        ref = resource_ref(doc)
        pod_spec = _pod_spec(body)
        containers = _containers(pod_spec) if pod_spec is not None else []
        skipped_ids = _skipped_check_ids(body)

        for check in self.registry:
            if check_filter and check.id not in check_filter:
                continue
            result = self._evaluate(check, body, pod_spec, containers)
            if result is None:
                continue
            if check.id in skipped_ids:
                result = CheckResult.SKIPPED
            findings.append(
                Finding(
                    check_id=check.id,
                    check_name=check.name,
                    result=result,
                    resource=ref,
                    file=doc.source_path,
                    span=doc.span,
                    guideline_url=check.guideline_url,
                )
            )
        return ScanReport.build(findings)

    def scan_documents(
        self, docs: Iterable[ManifestDocument], check_filter: frozenset[str] | set[str] | None = None
    ) -> ScanReport:
        findings: list[Finding] = []
        for doc in docs:
            findings.extend(self.scan_document(doc, check_filter).findings)
        return ScanReport.build(findings)

    def scan_text(
        self,
        text: str,
        source_path: str | Path,
        check_filter: frozenset[str] | set[str] | None = None,
    ) -> ScanReport:
        """Parse and scan a YAML stream; raises ParseFailure on bad input."""
        return self.scan_documents(parse_stream(text, source_path), check_filter)

    def scan_path(
        self, path: str | Path, check_filter: frozenset[str] | set[str] | None = None
    ) -> ScanReport:
        return self.scan_text(Path(path).read_text(encoding="utf-8"), path, check_filter)

    @staticmethod
    def _evaluate(
        check: CheckDefinition,
        body: dict[str, Any],
        pod_spec: dict[str, Any] | None,
        containers: list[Any],
    ) -> CheckResult | None:
        """Return the verdict, or None when the check is not applicable."""
        if check.scope is CheckScope.CONTAINER:
            if pod_spec is None or not containers:
                return None
            for conf in containers:
                if check.predicate(conf) is CheckResult.FAILED:
                    return CheckResult.FAILED
            return CheckResult.PASSED
        if check.scope is CheckScope.POD_SPEC:
            if pod_spec is None:
                return None
            return check.predicate(pod_spec)
        return check.predicate(body)


def _display_path(path: str) -> str:
    # The external tool prints scanned paths with a leading slash.
    return path if path.startswith("/") else "/" + path


def render_report_text(report: ScanReport) -> str:
    """Render a report in the external scanner's compact text format."""
    lines = [
        "kubernetes scan results:",
        (
            f"Passed checks: {report.passed_count}, "
            f"Failed checks: {report.failed_count}, "
            f"Skipped checks: {report.skipped_count}"
        ),
    ]
    for finding in report.failed_findings():
        lines.append(f'Check: {finding.check_id}: "{finding.check_name}"')
        lines.append(f"FAILED for resource: {finding.resource}")
        lines.append(f"File: {_display_path(finding.file)}:{finding.span[0]}-{finding.span[1]}")
        lines.append(f"Guide: {finding.guideline_url}")
    return "\n".join(lines) + "\n"


class ReportDiff(NamedTuple):
    """Set difference of failed findings between two report revisions."""

    resolved: frozenset[FindingKey]
    persisting: frozenset[FindingKey]
    introduced: frozenset[FindingKey]


def diff_reports(initial: ScanReport, final: ScanReport) -> ReportDiff:
    """Diff failed findings keyed by (check_id, rendered resource)."""
    before = initial.failed_keys()
    after = final.failed_keys()
    return ReportDiff(
        resolved=frozenset(before - after),
        persisting=frozenset(before & after),
        introduced=frozenset(after - before),
    )


def findings_to_records(report: ScanReport) -> list[dict[str, Any]]:
    """Serialize a report's findings as plain dicts (one per line in run logs)."""
    records = []
    for f in report.findings:
        records.append(
            {
                "check_id": f.check_id,
                "check_name": f.check_name,
                "result": f.result.value,
                "resource": {
                    "kind": f.resource.kind,
                    "namespace": f.resource.namespace,
                    "name": f.resource.name,
                },
                "file": f.file,
                "span": list(f.span),
                "guideline_url": f.guideline_url,
            }
        )
    return records


def export_findings_jsonl(report: ScanReport, path: str | Path) -> None:
    """Write the report as line-delimited records, one finding per line."""
    import json

    with open(path, "w", encoding="utf-8") as handle:
        for record in findings_to_records(report):
            handle.write(json.dumps(record, sort_keys=True) + "\n")


def report_from_records(records: list[dict[str, Any]], source: str = "Embedded") -> ScanReport:
    """Inverse of :func:`findings_to_records`."""
    from kubesecfix.manifest import ResourceRef

    findings = []
    for rec in records:
        res = rec["resource"]
        findings.append(
            Finding(
                check_id=rec["check_id"],
                check_name=rec.get("check_name", ""),
                result=CheckResult(rec["result"]),
                resource=ResourceRef(
                    kind=res["kind"], namespace=res["namespace"], name=res["name"]
                ),
                file=rec.get("file", ""),
                span=tuple(rec.get("span", (1, 1))),
                guideline_url=rec.get("guideline_url", ""),
            )
        )
    return ScanReport.build(findings, source=ReportSource(source))
