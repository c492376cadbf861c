"""Do not use the CAP_SYS_ADMIN linux capability."""

from __future__ import annotations

from typing import Any

from kubesecfix.policy.model import CheckDefinition, CheckResult, CheckScope

from ._base import guide


def scan_container_conf(conf: Any) -> CheckResult:
    if isinstance(conf, dict) and isinstance(conf.get("securityContext"), dict):
        capabilities = conf["securityContext"].get("capabilities")
        if isinstance(capabilities, dict):
            add = capabilities.get("add")
            if isinstance(add, list) and "SYS_ADMIN" in add:
                return CheckResult.FAILED
    return CheckResult.PASSED


check = CheckDefinition(
    id="CKV_K8S_39",
    name="Do not use the CAP_SYS_ADMIN linux capability",
    guideline_url=guide("bc-k8s-38"),
    scope=CheckScope.CONTAINER,
    evaluated_keys=("securityContext/capabilities/add",),
    predicate=scan_container_conf,
)
