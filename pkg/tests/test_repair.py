from __future__ import annotations

from pathlib import Path

import pytest

from kubesecfix.context import ContextVariant, RepairContext
from kubesecfix.manifest import ParseFailure
from kubesecfix.policy.engine import render_report_text
from kubesecfix.providers import ProviderAuthError, ScriptedProvider
from kubesecfix.repair import (
    RepairPolicy,
    SessionStatus,
    extract_config,
    render_prompt,
    repair_one,
)

from conftest import fenced

GOLDEN = Path(__file__).parent / "fixtures" / "golden" / "prompt_full.txt"

K20 = frozenset({"CKV_K8S_20"})


class ExplodingProvider:
    identity = "exploding"

    def generate(self, prompt: str, temperature: float) -> str:
        raise ProviderAuthError("credentials rejected (401)")


@pytest.fixture()
def insecure_path(tmp_path, insecure_pod_text) -> Path:
    path = tmp_path / "pod.yaml"
    path.write_text(insecure_pod_text)
    return path


# --- prompt rendering -------------------------------------------------------


def _synthetic_context(variant: ContextVariant) -> RepairContext:
    return RepairContext(
        scan_text="kubernetes scan results:\nPassed checks: 0, Failed checks: 1, Skipped checks: 0\n",
        policy_sources=(("CKV_K8S_20", "def scan_container_conf(conf):\n    ...\n"),)
        if variant.includes_code
        else (),
        guideline_texts=(("CKV_K8S_20", "Set the field to false.\n"),)
        if variant.includes_docs
        else (),
        variant=variant,
    )


def test_full_prompt_matches_golden_file():
    prompt = render_prompt(_synthetic_context(ContextVariant.FULL), "kind: Pod\n")
    assert prompt == GOLDEN.read_text()


def test_full_prompt_section_order():
    prompt = render_prompt(_synthetic_context(ContextVariant.FULL), "kind: Pod\n")
    positions = [
        prompt.index("## Current configuration"),
        prompt.index("## Scan results"),
        prompt.index("## Policy implementation source"),
        prompt.index("## Guideline documentation"),
        prompt.index("## Output rules"),
    ]
    assert positions == sorted(positions)


def test_scan_only_prompt_omits_auxiliary_sections():
    prompt = render_prompt(_synthetic_context(ContextVariant.SCAN_ONLY), "kind: Pod\n")
    assert "## Policy implementation source" not in prompt
    assert "## Guideline documentation" not in prompt


def test_prompt_is_deterministic():
    context = _synthetic_context(ContextVariant.FULL)
    assert render_prompt(context, "kind: Pod\n") == render_prompt(context, "kind: Pod\n")


# --- candidate extraction ---------------------------------------------------


def test_extract_takes_fenced_block(secure_pod_text):
    assert extract_config(fenced(secure_pod_text)) == secure_pod_text


def test_extract_refuses_prose():
    with pytest.raises(ParseFailure):
        extract_config("I cannot help with that request.")
    with pytest.raises(ParseFailure):
        extract_config("")


def test_extract_takes_last_of_multiple_blocks(insecure_pod_text, secure_pod_text):
    response = (
        "The original file was:\n" + fenced(insecure_pod_text) + "\nCorrected:\n" + fenced(secure_pod_text)
    )
    assert extract_config(response) == secure_pod_text


def test_extract_accepts_bare_yaml(secure_pod_text):
    assert extract_config(secure_pod_text) == secure_pod_text


def test_extract_rejects_comment_only_yaml():
    with pytest.raises(ParseFailure):
        extract_config("```yaml\n# nothing here\n```")


# --- repair loop ------------------------------------------------------------


def test_canonical_fix_passes_first_step(engine, retriever, insecure_path, secure_pod_text):
    provider = ScriptedProvider([fenced(secure_pod_text)])
    policy = RepairPolicy(check_filter=K20)
    session = repair_one(insecure_path, provider, policy, engine, retriever)
    assert session.status is SessionStatus.PASSED
    assert session.pass_step == 1
    assert len(session.attempts) == 1
    assert session.attempts[0].parse_retries_used == 0
    assert provider.call_count == 1
    # pass soundness: an independent re-scan of the final artifact is clean
    rescanned = engine.scan_text(session.final_config, "final.yaml", K20)
    assert rescanned.failed_count == 0


def test_garbage_provider_exhausts_parse_retries(engine, retriever, insecure_path):
    provider = ScriptedProvider(["not yaml at all"])
    policy = RepairPolicy(check_filter=K20)
    session = repair_one(insecure_path, provider, policy, engine, retriever)
    assert session.status is SessionStatus.PARSE_EXHAUSTED
    assert len(session.attempts) == 1
    assert provider.call_count == 10
    assert len(session.attempts[0].raw_responses) == 10
    assert session.attempts[0].parse_retries_used == 10
    assert session.attempts[0].accepted_candidate is None
    assert session.final_config is None


def test_never_fixing_provider_exhausts_attempts(engine, retriever, insecure_path, insecure_pod_text):
    provider = ScriptedProvider([fenced(insecure_pod_text)])
    policy = RepairPolicy(check_filter=K20)
    session = repair_one(insecure_path, provider, policy, engine, retriever)
    assert session.status is SessionStatus.EXHAUSTED
    assert len(session.attempts) == 5
    assert provider.call_count == 5
    assert session.pass_step is None
    # bounded work: calls never exceed max_attempts x max_parse_retries
    assert provider.call_count <= policy.max_attempts * policy.max_parse_retries


def test_clean_input_passes_trivially(engine, retriever, tmp_path, secure_pod_text):
    path = tmp_path / "secure.yaml"
    path.write_text(secure_pod_text)
    provider = ScriptedProvider(["should never be called"])
    session = repair_one(path, provider, RepairPolicy(check_filter=K20), engine, retriever)
    assert session.status is SessionStatus.PASSED
    assert session.attempts == []
    assert session.pass_step == 0
    assert provider.call_count == 0
    assert session.final_config == secure_pod_text


def test_inner_retry_recovers_from_one_bad_response(engine, retriever, insecure_path, secure_pod_text):
    provider = ScriptedProvider(["garbage first", fenced(secure_pod_text)])
    session = repair_one(insecure_path, provider, RepairPolicy(check_filter=K20), engine, retriever)
    assert session.status is SessionStatus.PASSED
    assert session.pass_step == 1
    assert provider.call_count == 2
    assert session.attempts[0].parse_retries_used == 1
    assert len(session.attempts[0].raw_responses) == 2


def test_outer_loop_refreshes_context_from_latest_candidate(engine, retriever, tmp_path):
    staged = """apiVersion: v1
kind: Pod
metadata:
  name: staged
spec:
  containers:
  - name: app
    image: nginx:1.25
    securityContext:
      allowPrivilegeEscalation: true
      privileged: true
"""
    partial = staged.replace("privileged: true", "privileged: false")
    full = partial.replace("allowPrivilegeEscalation: true", "allowPrivilegeEscalation: false")
    path = tmp_path / "staged.yaml"
    path.write_text(staged)

    both = frozenset({"CKV_K8S_16", "CKV_K8S_20"})
    provider = ScriptedProvider([fenced(partial), fenced(full)])
    session = repair_one(path, provider, RepairPolicy(check_filter=both), engine, retriever)

    assert session.status is SessionStatus.PASSED
    assert session.pass_step == 2
    assert len(session.attempts) == 2
    # attempt 2's context reflects attempt 1's residual findings
    first_validation = session.attempts[0].validation_report
    assert first_validation.failed_count == 1
    assert session.attempts[1].context_snapshot.scan_text == render_report_text(first_validation)
    # attempt 1's context reflects the original input's report
    assert session.attempts[0].context_snapshot.scan_text == render_report_text(
        session.initial_report
    )


def test_provider_failure_is_unrecoverable(engine, retriever, insecure_path):
    session = repair_one(
        insecure_path, ExplodingProvider(), RepairPolicy(check_filter=K20), engine, retriever
    )
    assert session.status is SessionStatus.UNRECOVERABLE
    assert "401" in session.error
    assert len(session.attempts) == 1
    assert session.final_config is None


def test_every_call_lands_in_exactly_one_attempt(engine, retriever, insecure_path, secure_pod_text):
    provider = ScriptedProvider(["junk", "junk", fenced(secure_pod_text)])
    session = repair_one(insecure_path, provider, RepairPolicy(check_filter=K20), engine, retriever)
    assert provider.call_count == sum(len(a.raw_responses) for a in session.attempts)


def test_policy_rejects_bad_bounds():
    with pytest.raises(ValueError):
        RepairPolicy(max_attempts=0)
    with pytest.raises(ValueError):
        RepairPolicy(max_parse_retries=0)
    with pytest.raises(ValueError):
        RepairPolicy(temperature=3.0)


def test_policy_defaults_match_run_configuration():
    policy = RepairPolicy()
    assert policy.max_attempts == 5
    assert policy.max_parse_retries == 10
    assert policy.temperature == 0.5
