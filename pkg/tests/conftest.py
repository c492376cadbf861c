from __future__ import annotations

from pathlib import Path

import pytest

from kubesecfix.context import ContextRetriever, build_policy_index, index_mapping
from kubesecfix.policy import PolicyEngine, register_builtin_checks
from kubesecfix.policy.builtin import builtin_policy_root

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def engine() -> PolicyEngine:
    return PolicyEngine(register_builtin_checks())


@pytest.fixture(scope="session")
def builtin_index() -> dict[str, str]:
    return index_mapping(build_policy_index(builtin_policy_root()))


@pytest.fixture()
def retriever(builtin_index) -> ContextRetriever:
    return ContextRetriever(index=builtin_index, cache=None)


@pytest.fixture(scope="session")
def insecure_pod_text() -> str:
    return (FIXTURES / "pod_insecure.yaml").read_text()


@pytest.fixture(scope="session")
def secure_pod_text() -> str:
    return (FIXTURES / "pod_secure.yaml").read_text()


def fenced(yaml_text: str, lang: str = "yaml") -> str:
    """Wrap YAML in a fenced block the way chat models answer."""
    return f"Here is the corrected configuration:\n```{lang}\n{yaml_text}```\n"
