"""Containers should not share the host process ID namespace."""

from __future__ import annotations

from typing import Any

from kubesecfix.policy.model import CheckDefinition, CheckResult, CheckScope

from ._base import guide


def scan_pod_spec(spec: Any) -> CheckResult:
    if isinstance(spec, dict) and spec.get("hostPID"):
        return CheckResult.FAILED
    return CheckResult.PASSED


check = CheckDefinition(
    id="CKV_K8S_17",
    name="Containers should not share the host process ID namespace",
    guideline_url=guide("bc-k8s-16"),
    scope=CheckScope.POD_SPEC,
    evaluated_keys=("hostPID",),
    predicate=scan_pod_spec,
)
