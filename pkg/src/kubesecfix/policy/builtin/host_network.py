"""Containers should not share the host network namespace."""

from __future__ import annotations

from typing import Any

from kubesecfix.policy.model import CheckDefinition, CheckResult, CheckScope

from ._base import guide


def scan_pod_spec(spec: Any) -> CheckResult:
    if isinstance(spec, dict) and spec.get("hostNetwork"):
        return CheckResult.FAILED
    return CheckResult.PASSED


check = CheckDefinition(
    id="CKV_K8S_19",
    name="Containers should not share the host network namespace",
    guideline_url=guide("bc-k8s-18"),
    scope=CheckScope.POD_SPEC,
    evaluated_keys=("hostNetwork",),
    predicate=scan_pod_spec,
)
