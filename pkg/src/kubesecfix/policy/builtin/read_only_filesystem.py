"""Use read-only filesystem for containers where possible."""

from __future__ import annotations

from typing import Any

from kubesecfix.policy.model import CheckDefinition, CheckResult, CheckScope

from ._base import guide


def scan_container_conf(conf: Any) -> CheckResult:
    if isinstance(conf, dict) and isinstance(conf.get("securityContext"), dict):
        if conf["securityContext"].get("readOnlyRootFilesystem"):
            return CheckResult.PASSED
    return CheckResult.FAILED


check = CheckDefinition(
    id="CKV_K8S_22",
    name="Use read-only filesystem for containers where possible",
    guideline_url=guide("bc-k8s-21"),
    scope=CheckScope.CONTAINER,
    evaluated_keys=("securityContext/readOnlyRootFilesystem",),
    predicate=scan_container_conf,
)
