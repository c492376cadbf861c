"""Image Tag should be fixed - not latest or blank.

Digest-pinned images (``repo@sha256:...``) pass; an image without a tag or
tagged ``latest`` fails.
"""

from __future__ import annotations

from typing import Any

from kubesecfix.policy.model import CheckDefinition, CheckResult, CheckScope

from ._base import guide


def scan_container_conf(conf: Any) -> CheckResult:
    if not isinstance(conf, dict):
        return CheckResult.FAILED
    image = conf.get("image")
    if not isinstance(image, str) or not image:
        return CheckResult.FAILED
    if "@" in image:
        return CheckResult.PASSED
    if ":" not in image.rsplit("/", 1)[-1]:
        return CheckResult.FAILED
    tag = image.rsplit(":", 1)[-1]
    if tag == "latest" or not tag:
        return CheckResult.FAILED
    return CheckResult.PASSED


check = CheckDefinition(
    id="CKV_K8S_14",
    name="Image Tag should be fixed - not latest or blank",
    guideline_url=guide("bc-k8s-13"),
    scope=CheckScope.CONTAINER,
    evaluated_keys=("image",),
    predicate=scan_container_conf,
)
