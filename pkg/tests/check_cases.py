"""Expected verdicts for every builtin check's (fail, pass, edge) fixture triple.

The same table drives the embedded unit tests and the differential suite
against the external scanner, so both sides always agree on what a fixture
is supposed to prove.
"""

from __future__ import annotations

from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures" / "checks"

CASES = ("fail", "pass", "edge")

# verdict strings match CheckResult values
EXPECTED_VERDICTS: dict[str, dict[str, str]] = {
    "CKV_K8S_8": {"fail": "Failed", "pass": "Passed", "edge": "Failed"},
    "CKV_K8S_9": {"fail": "Failed", "pass": "Passed", "edge": "Failed"},
    "CKV_K8S_10": {"fail": "Failed", "pass": "Passed", "edge": "Failed"},
    "CKV_K8S_11": {"fail": "Failed", "pass": "Passed", "edge": "Failed"},
    "CKV_K8S_12": {"fail": "Failed", "pass": "Passed", "edge": "Failed"},
    "CKV_K8S_13": {"fail": "Failed", "pass": "Passed", "edge": "Failed"},
    "CKV_K8S_14": {"fail": "Failed", "pass": "Passed", "edge": "Failed"},
    "CKV_K8S_16": {"fail": "Failed", "pass": "Passed", "edge": "Passed"},
    "CKV_K8S_17": {"fail": "Failed", "pass": "Passed", "edge": "Passed"},
    "CKV_K8S_18": {"fail": "Failed", "pass": "Passed", "edge": "Passed"},
    "CKV_K8S_19": {"fail": "Failed", "pass": "Passed", "edge": "Passed"},
    "CKV_K8S_20": {"fail": "Failed", "pass": "Passed", "edge": "Failed"},
    "CKV_K8S_22": {"fail": "Failed", "pass": "Passed", "edge": "Failed"},
    "CKV_K8S_28": {"fail": "Failed", "pass": "Passed", "edge": "Passed"},
    "CKV_K8S_39": {"fail": "Failed", "pass": "Passed", "edge": "Passed"},
}


def fixture_path(check_id: str, case: str) -> Path:
    return FIXTURES / f"{check_id.lower()}_{case}.yaml"


def all_cases() -> list[tuple[str, str, str]]:
    """(check_id, case, expected verdict) for every fixture."""
    return [
        (check_id, case, verdict)
        for check_id, verdicts in sorted(EXPECTED_VERDICTS.items())
        for case, verdict in verdicts.items()
    ]
