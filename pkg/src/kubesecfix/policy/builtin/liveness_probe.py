"""Liveness Probe Should be Configured."""

from __future__ import annotations

from typing import Any

from kubesecfix.policy.model import CheckDefinition, CheckResult, CheckScope

from ._base import guide


def scan_container_conf(conf: Any) -> CheckResult:
    if isinstance(conf, dict) and conf.get("livenessProbe"):
        return CheckResult.PASSED
    return CheckResult.FAILED


check = CheckDefinition(
    id="CKV_K8S_8",
    name="Liveness Probe Should be Configured",
    guideline_url=guide("bc-k8s-7"),
    scope=CheckScope.CONTAINER,
    evaluated_keys=("livenessProbe",),
    predicate=scan_container_conf,
)
