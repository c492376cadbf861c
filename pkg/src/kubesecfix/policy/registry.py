"""Registry of security checks, immutable after startup."""

from __future__ import annotations

from typing import Iterable, Iterator

from kubesecfix.policy.builtin import ALL_CHECKS
from kubesecfix.policy.model import CheckDefinition


class DuplicateCheckIdError(Exception):
    """Two checks were registered under the same id."""


def _numeric_suffix(check_id: str) -> int:
    return int(check_id.rsplit("_", 1)[-1])


class CheckRegistry:
    def __init__(self, checks: Iterable[CheckDefinition]):
        self._checks: dict[str, CheckDefinition] = {}
        for check in checks:
            if check.id in self._checks:
                raise DuplicateCheckIdError(f"check id {check.id} registered twice")
            self._checks[check.id] = check

    def get(self, check_id: str) -> CheckDefinition:
        return self._checks[check_id]

    def __contains__(self, check_id: str) -> bool:
        return check_id in self._checks

    def __len__(self) -> int:
        return len(self._checks)

    def __iter__(self) -> Iterator[CheckDefinition]:
        return iter(sorted(self._checks.values(), key=lambda c: _numeric_suffix(c.id)))

    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self)


def register_builtin_checks() -> CheckRegistry:
    """Build the registry of all builtin checks."""
    return CheckRegistry(ALL_CHECKS)
