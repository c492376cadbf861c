"""Verdicts of every builtin check over its fixture triple."""

from __future__ import annotations

import pytest

from kubesecfix.manifest import parse_stream
from kubesecfix.policy.builtin.allow_privilege_escalation import scan_container_conf
from kubesecfix.policy.model import CheckResult

from check_cases import all_cases, fixture_path


@pytest.mark.parametrize("check_id,case,expected", all_cases())
def test_fixture_verdict(engine, check_id, case, expected):
    path = fixture_path(check_id, case)
    docs = parse_stream(path.read_text(), path)
    report = engine.scan_documents(docs, {check_id})
    assert len(report.findings) == 1, f"{check_id} should be applicable to {path.name}"
    assert report.findings[0].result.value == expected


def test_privilege_escalation_predicate_matches_reference_logic():
    assert scan_container_conf({"securityContext": {"allowPrivilegeEscalation": False}}) is CheckResult.PASSED
    assert scan_container_conf({}) is CheckResult.FAILED
    assert scan_container_conf({"securityContext": {"allowPrivilegeEscalation": "false"}}) is CheckResult.FAILED
    assert scan_container_conf({"securityContext": {"allowPrivilegeEscalation": True}}) is CheckResult.FAILED
    assert scan_container_conf({"securityContext": {}}) is CheckResult.FAILED
    assert scan_container_conf("not a mapping") is CheckResult.FAILED


def test_string_false_fixture_fails(engine, fixtures_dir):
    text = (fixtures_dir / "ckv_k8s_20_string_false.yaml").read_text()
    report = engine.scan_text(text, "stringly.yaml", {"CKV_K8S_20"})
    assert report.failed_count == 1


def test_predicates_survive_junk_containers(engine):
    text = "kind: Pod\nmetadata:\n  name: junk\nspec:\n  containers:\n  - 42\n  - just-a-string\n"
    report = engine.scan_text(text, "junk.yaml")
    # every applicable check yields exactly one verdict, none raises
    assert {f.resource.name for f in report.findings} == {"junk"}
