"""Differential suite: embedded verdicts must match the external scanner.

Runs only when the external tool is installed; its absence is a recorded
capability, not a failure.
"""

from __future__ import annotations

import pytest

from kubesecfix.manifest import parse_stream
from kubesecfix.policy.external import detect_external_tool, scan_external
from kubesecfix.policy.model import CheckResult

from check_cases import all_cases, fixture_path

CAPABILITY = detect_external_tool()

pytestmark = pytest.mark.skipif(
    not CAPABILITY.available,
    reason=f"external scanner unavailable: {CAPABILITY.reason}",
)


def _external_verdict(path, check_id) -> CheckResult | None:
    report = scan_external(path, {check_id})
    for finding in report.findings:
        if finding.check_id == check_id:
            return finding.result
    return None


@pytest.mark.parametrize("check_id,case,expected", all_cases())
def test_embedded_matches_external(engine, check_id, case, expected):
    path = fixture_path(check_id, case)
    docs = parse_stream(path.read_text(), path)
    embedded = engine.scan_documents(docs, {check_id}).findings[0].result
    external = _external_verdict(path, check_id)
    assert external is not None, f"external tool produced no verdict for {path.name}"
    assert embedded == external
    assert embedded.value == expected


def test_canonical_pair_parity(engine, fixtures_dir):
    insecure = fixtures_dir / "pod_insecure.yaml"
    secure = fixtures_dir / "pod_secure.yaml"
    assert _external_verdict(insecure, "CKV_K8S_20") is CheckResult.FAILED
    assert _external_verdict(secure, "CKV_K8S_20") is CheckResult.PASSED
    assert engine.scan_path(insecure, {"CKV_K8S_20"}).failed_count == 1
    assert engine.scan_path(secure, {"CKV_K8S_20"}).failed_count == 0


def test_string_false_differential(engine, fixtures_dir):
    path = fixtures_dir / "ckv_k8s_20_string_false.yaml"
    assert _external_verdict(path, "CKV_K8S_20") is CheckResult.FAILED
    assert engine.scan_path(path, {"CKV_K8S_20"}).failed_count == 1
