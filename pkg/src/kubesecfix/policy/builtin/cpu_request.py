"""CPU requests should be set."""

from __future__ import annotations

from typing import Any

from kubesecfix.policy.model import CheckDefinition, CheckResult, CheckScope

from ._base import guide


def scan_container_conf(conf: Any) -> CheckResult:
    if isinstance(conf, dict):
        resources = conf.get("resources")
        if isinstance(resources, dict):
            requests = resources.get("requests")
            if isinstance(requests, dict) and requests.get("cpu"):
                return CheckResult.PASSED
    return CheckResult.FAILED


check = CheckDefinition(
    id="CKV_K8S_10",
    name="CPU requests should be set",
    guideline_url=guide("bc-k8s-9"),
    scope=CheckScope.CONTAINER,
    evaluated_keys=("resources/requests/cpu",),
    predicate=scan_container_conf,
)
