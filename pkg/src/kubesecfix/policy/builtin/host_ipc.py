"""Containers should not share the host IPC namespace."""

from __future__ import annotations

from typing import Any

from kubesecfix.policy.model import CheckDefinition, CheckResult, CheckScope

from ._base import guide


def scan_pod_spec(spec: Any) -> CheckResult:
    if isinstance(spec, dict) and spec.get("hostIPC"):
        return CheckResult.FAILED
    return CheckResult.PASSED


check = CheckDefinition(
    id="CKV_K8S_18",
    name="Containers should not share the host IPC namespace",
    guideline_url=guide("bc-k8s-17"),
    scope=CheckScope.POD_SPEC,
    evaluated_keys=("hostIPC",),
    predicate=scan_pod_spec,
)
