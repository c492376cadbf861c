"""Kubernetes security misconfiguration detection and automated repair."""

from kubesecfix.context import ContextRetriever, ContextVariant, DocCache, RepairContext
from kubesecfix.manifest import (
    ManifestDocument,
    ParseFailure,
    ResourceRef,
    parse_stream,
    resource_ref,
    serialize,
    split_resources,
)
from kubesecfix.metrics import EvaluationRecord, MetricsSummary, StepTrace
from kubesecfix.policy import PolicyEngine, ScanReport, register_builtin_checks
from kubesecfix.providers import HttpChatProvider, RepairProvider, ScriptedProvider
from kubesecfix.repair import RepairPolicy, RepairSession, SessionStatus, repair_one

__version__ = "0.1.0"

__all__ = [
    "ContextRetriever",
    "ContextVariant",
    "DocCache",
    "EvaluationRecord",
    "HttpChatProvider",
    "ManifestDocument",
    "MetricsSummary",
    "ParseFailure",
    "PolicyEngine",
    "RepairContext",
    "RepairPolicy",
    "RepairProvider",
    "RepairSession",
    "ResourceRef",
    "ScanReport",
    "ScriptedProvider",
    "SessionStatus",
    "StepTrace",
    "__version__",
    "parse_stream",
    "register_builtin_checks",
    "repair_one",
    "resource_ref",
    "serialize",
    "split_resources",
]
