"""Container should not be privileged."""

from __future__ import annotations

from typing import Any

from kubesecfix.policy.model import CheckDefinition, CheckResult, CheckScope

from ._base import guide


def scan_container_conf(conf: Any) -> CheckResult:
    if isinstance(conf, dict) and isinstance(conf.get("securityContext"), dict):
        if conf["securityContext"].get("privileged"):
            return CheckResult.FAILED
    return CheckResult.PASSED


check = CheckDefinition(
    id="CKV_K8S_16",
    name="Container should not be privileged",
    guideline_url=guide("bc-k8s-15"),
    scope=CheckScope.CONTAINER,
    evaluated_keys=("securityContext/privileged",),
    predicate=scan_container_conf,
)
