"""Memory limits should be set."""

from __future__ import annotations

from typing import Any

from kubesecfix.policy.model import CheckDefinition, CheckResult, CheckScope

from ._base import guide


def scan_container_conf(conf: Any) -> CheckResult:
    if isinstance(conf, dict):
        resources = conf.get("resources")
        if isinstance(resources, dict):
            limits = resources.get("limits")
            if isinstance(limits, dict) and limits.get("memory"):
                return CheckResult.PASSED
    return CheckResult.FAILED


check = CheckDefinition(
    id="CKV_K8S_13",
    name="Memory limits should be set",
    guideline_url=guide("bc-k8s-12"),
    scope=CheckScope.CONTAINER,
    evaluated_keys=("resources/limits/memory",),
    predicate=scan_container_conf,
)
