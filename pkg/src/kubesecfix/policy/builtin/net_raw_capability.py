"""Minimize the admission of containers with the NET_RAW capability.

Passes only when the container explicitly drops ``NET_RAW`` or ``ALL``.
"""

from __future__ import annotations

from typing import Any

from kubesecfix.policy.model import CheckDefinition, CheckResult, CheckScope

from ._base import guide


def scan_container_conf(conf: Any) -> CheckResult:
    if isinstance(conf, dict) and isinstance(conf.get("securityContext"), dict):
        capabilities = conf["securityContext"].get("capabilities")
        if isinstance(capabilities, dict):
            drop = capabilities.get("drop")
            if isinstance(drop, list) and ("NET_RAW" in drop or "ALL" in drop):
                return CheckResult.PASSED
    return CheckResult.FAILED


check = CheckDefinition(
    id="CKV_K8S_28",
    name="Minimize the admission of containers with the NET_RAW capability",
    guideline_url=guide("bc-k8s-27"),
    scope=CheckScope.CONTAINER,
    evaluated_keys=("securityContext/capabilities/drop",),
    predicate=scan_container_conf,
)
