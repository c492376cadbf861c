"""Builtin security check catalog, one module per policy."""

from __future__ import annotations

from pathlib import Path

from kubesecfix.policy.model import CheckDefinition

from . import (
    allow_privilege_escalation,
    cpu_limit,
    cpu_request,
    host_ipc,
    host_network,
    host_pid,
    image_tag,
    liveness_probe,
    memory_limit,
    memory_request,
    net_raw_capability,
    privileged_container,
    read_only_filesystem,
    readiness_probe,
    sys_admin_capability,
)

ALL_CHECKS: tuple[CheckDefinition, ...] = (
    liveness_probe.check,
    readiness_probe.check,
    cpu_request.check,
    cpu_limit.check,
    memory_request.check,
    memory_limit.check,
    image_tag.check,
    privileged_container.check,
    host_pid.check,
    host_ipc.check,
    host_network.check,
    allow_privilege_escalation.check,
    read_only_filesystem.check,
    net_raw_capability.check,
    sys_admin_capability.check,
)


def builtin_policy_root() -> Path:
    """Directory holding the builtin policy implementation sources."""
    return Path(__file__).resolve().parent
