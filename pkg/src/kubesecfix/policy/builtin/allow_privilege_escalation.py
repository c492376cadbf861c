"""Containers should not run with allowPrivilegeEscalation.

The field must be an explicit boolean ``false``; a missing securityContext,
a missing field, or a string ``"false"`` all fail.
"""

from __future__ import annotations

from typing import Any

from kubesecfix.policy.model import CheckDefinition, CheckResult, CheckScope

from ._base import guide


def scan_container_conf(conf: Any) -> CheckResult:
    if isinstance(conf, dict) and conf.get("securityContext"):
        if conf["securityContext"].get("allowPrivilegeEscalation") is False:
            return CheckResult.PASSED
    return CheckResult.FAILED


check = CheckDefinition(
    id="CKV_K8S_20",
    name="Containers should not run with allowPrivilegeEscalation",
    guideline_url=guide("bc-k8s-19"),
    scope=CheckScope.CONTAINER,
    evaluated_keys=("securityContext/allowPrivilegeEscalation",),
    predicate=scan_container_conf,
)
