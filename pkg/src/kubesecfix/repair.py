"""Two-stage retry repair loop for one configuration.

Outer loop: bounded repair attempts, each re-assembling context from the
current candidate's scan.  Inner loop: bounded provider calls until one
response yields parseable YAML.  Parse retries reuse the same prompt; the
provider's temperature supplies the variation.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from kubesecfix.context import ContextRetriever, ContextVariant, RepairContext
from kubesecfix.manifest import ParseFailure, parse_stream
from kubesecfix.policy.engine import PolicyEngine
from kubesecfix.policy.model import ScanReport
from kubesecfix.providers import ProviderError, RepairProvider

logger = logging.getLogger(__name__)

FENCE_RE = re.compile(r"```[ \t]*[A-Za-z0-9_+-]*[ \t]*\r?\n(.*?)```", re.DOTALL)

PROMPT_TASK = (
    "You are repairing a Kubernetes configuration file that failed security checks.\n"
    "Resolve every reported check while preserving the workload's intent."
)
PROMPT_OUTPUT_RULES = (
    "Emit the complete corrected file as one fenced YAML block. "
    "Change only what is necessary to resolve the reported checks."
)


@dataclass(frozen=True)
class RepairPolicy:
    """Loop bounds and sampling configuration for repair sessions.

    Defaults mirror the evaluated run configuration: 5 repair attempts,
    10 parse retries, temperature 0.5.
    """

    max_attempts: int = 5
    max_parse_retries: int = 10
    temperature: float = 0.5
    active_variant: ContextVariant = ContextVariant.FULL
    check_filter: frozenset[str] | None = None

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be positive")
        if self.max_parse_retries < 1:
            raise ValueError("max_parse_retries must be positive")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be within [0, 2]")


class SessionStatus(Enum):
    PASSED = "Passed"
    EXHAUSTED = "Exhausted"
    PARSE_EXHAUSTED = "ParseExhausted"
    UNRECOVERABLE = "Unrecoverable"


@dataclass
class AttemptRecord:
    """Audit record of one outer-loop attempt."""

    attempt_index: int
    context_snapshot: RepairContext
    prompt: str
    raw_responses: list[str] = field(default_factory=list)
    accepted_candidate: str | None = None
    parse_retries_used: int = 0
    validation_report: ScanReport | None = None


@dataclass
class RepairSession:
    """Full audit trail of one configuration's repair."""

    input_path: str
    initial_report: ScanReport
    attempts: list[AttemptRecord]
    status: SessionStatus
    final_config: str | None = None
    pass_step: int | None = None
    error: str | None = None
    provider_identity: str = ""


def render_prompt(context: RepairContext, current_config: str) -> str:
    """Render the repair prompt: fixed section order, deterministic bytes."""
    sections = [
        PROMPT_TASK,
        "## Current configuration\n```yaml\n" + current_config.rstrip("\n") + "\n```",
        "## Scan results\n" + context.scan_text.rstrip("\n"),
    ]
    if context.policy_sources:
        parts = [
            f"### {check_id}\n```python\n{source.rstrip()}\n```"
            for check_id, source in context.policy_sources
        ]
        sections.append("## Policy implementation source\n" + "\n".join(parts))
    if context.guideline_texts:
        parts = [f"### {check_id}\n{text.rstrip()}" for check_id, text in context.guideline_texts]
        sections.append("## Guideline documentation\n" + "\n".join(parts))
    sections.append("## Output rules\n" + PROMPT_OUTPUT_RULES)
    return "\n\n".join(sections) + "\n"


def extract_config(response: str) -> str:
    """Pull the candidate configuration out of a raw provider response.

    Takes the last fenced code block if any (models often restate the input
    first), otherwise the whole response.  Raises :class:`ParseFailure` when
    the result is not at least one YAML resource document.
    """
    blocks = FENCE_RE.findall(response)
    candidate = (blocks[-1] if blocks else response).strip()
    if not candidate:
        raise ParseFailure("empty candidate")
    candidate += "\n"
    docs = parse_stream(candidate, source_path="<candidate>")
    if not docs:
        raise ParseFailure("response contains no resource documents")
    return candidate


def repair_one(
    input_path: str | Path,
    provider: RepairProvider,
    policy: RepairPolicy,
    engine: PolicyEngine,
    retriever: ContextRetriever,
) -> RepairSession:
    """Drive one configuration through the nested repair loops.

    Terminal statuses: Passed (re-scan clean under the filter), Exhausted
    (attempt budget spent), ParseExhausted (no parseable candidate within
    one attempt's retry budget), Unrecoverable (provider failure that more
    attempts cannot cure).  An already-clean input passes trivially with
    zero attempts and ``pass_step`` 0.
    """
    path = Path(input_path)
    text = path.read_text(encoding="utf-8")
    initial_report = engine.scan_text(text, source_path=str(path), check_filter=policy.check_filter)

    session = RepairSession(
        input_path=str(path),
        initial_report=initial_report,
        attempts=[],
        status=SessionStatus.EXHAUSTED,
        provider_identity=getattr(provider, "identity", ""),
    )

    if initial_report.failed_count == 0:
        session.status = SessionStatus.PASSED
        session.final_config = text
        session.pass_step = 0
        return session

    current_text = text
    current_report = initial_report

    for attempt_index in range(1, policy.max_attempts + 1):
        context = retriever.assemble(current_report, policy.active_variant)
        prompt = render_prompt(context, current_text)
        record = AttemptRecord(attempt_index=attempt_index, context_snapshot=context, prompt=prompt)
        session.attempts.append(record)

        accepted: str | None = None
        try:
            for _ in range(policy.max_parse_retries):
                response = provider.generate(prompt, policy.temperature)
                record.raw_responses.append(response)
                try:
                    accepted = extract_config(response)
                    break
                except ParseFailure as exc:
                    logger.debug("attempt %d: unparseable response: %s", attempt_index, exc)
        except ProviderError as exc:
            record.parse_retries_used = len(record.raw_responses)
            session.status = SessionStatus.UNRECOVERABLE
            session.error = str(exc)
            logger.error("%s: unrecoverable provider failure: %s", path, exc)
            return session

        if accepted is None:
            record.parse_retries_used = len(record.raw_responses)
            session.status = SessionStatus.PARSE_EXHAUSTED
            logger.info(
                "%s: parse retries exhausted on attempt %d", path, attempt_index
            )
            return session

        record.parse_retries_used = len(record.raw_responses) - 1
        record.accepted_candidate = accepted
        validation = engine.scan_text(
            accepted, source_path=str(path), check_filter=policy.check_filter
        )
        record.validation_report = validation

        if validation.failed_count == 0:
            session.status = SessionStatus.PASSED
            session.final_config = accepted
            session.pass_step = attempt_index
            return session

        # Carry the latest parsed candidate forward: the next attempt's
        # context reflects its residual findings, not the original input's.
        current_text = accepted
        current_report = validation

    session.status = SessionStatus.EXHAUSTED
    return session
