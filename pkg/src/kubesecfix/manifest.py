"""Parsing, splitting, addressing and re-serialization of Kubernetes YAML resources.

Documents are plain Python trees (dicts/lists/scalars) produced by a safe
loader.  Key order and scalar types survive a parse/serialize round trip;
comments do not.  Anchors and aliases are expanded on parse so downstream
consumers always see concrete values.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

logger = logging.getLogger(__name__)

EMIT_INDENT = 2
# Wide enough that plain scalars are never folded across lines; folding is
# value-preserving but makes diffs noisy.
EMIT_WIDTH = 4096


class ParseFailure(Exception):
    """YAML input could not be parsed into manifest documents."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.message = message
        self.line = line

    def __str__(self) -> str:
        if self.line is not None:
            return f"{self.message} (line {self.line})"
        return self.message


@dataclass(frozen=True)
class ResourceRef:
    """Identity of one resource, rendered as ``<kind>.<namespace>.<name>``."""

    kind: str
    namespace: str = "default"
    name: str = "<unnamed>"

    def __str__(self) -> str:
        return f"{self.kind}.{self.namespace}.{self.name}"


@dataclass(frozen=True)
class ManifestDocument:
    """One parsed resource document with its source location.

    ``span`` is (start_line, end_line), 1-based inclusive, into the original
    stream.  ``doc_index`` is the 0-based position among the non-empty
    documents of that stream.  The body is treated as immutable after parse.
    """

    body: dict[str, Any]
    source_path: str
    span: tuple[int, int] = (1, 1)
    doc_index: int = 0


class _ManifestLoader(yaml.SafeLoader):
    """SafeLoader variant that warns on duplicate mapping keys (last wins)."""

    def construct_mapping(self, node, deep=False):
        seen: set[Any] = set()
        for key_node, _ in node.value:
            if isinstance(key_node, yaml.ScalarNode):
                if key_node.value in seen:
                    logger.warning(
                        "duplicate mapping key %r at line %d; keeping the last occurrence",
                        key_node.value,
                        key_node.start_mark.line + 1,
                    )
                seen.add(key_node.value)
        return super().construct_mapping(node, deep=deep)


def _end_line(node: yaml.Node) -> int:
    # The end mark of a block node sits either just past the final scalar
    # (column > 0) or at the start of the following line (column == 0).
    end = node.end_mark
    line = end.line if end.column == 0 else end.line + 1
    return max(line, node.start_mark.line + 1)


def parse_stream(text: str, source_path: str | Path) -> list[ManifestDocument]:
    """Parse a (possibly multi-document) YAML stream into documents.

    Empty documents are skipped; non-mapping documents (bare scalars,
    sequences) are skipped with a warning since they cannot be resources.
    Raises :class:`ParseFailure` on malformed YAML; one bad document fails
    the whole stream, there is no partial success.
    """
    loader = _ManifestLoader(text)
    docs: list[ManifestDocument] = []
    try:
        while loader.check_node():
            node = loader.get_node()
            body = loader.construct_document(node)
            if body is None:
                continue
            if not isinstance(body, dict):
                logger.warning(
                    "%s: skipping non-mapping document at line %d",
                    source_path,
                    node.start_mark.line + 1,
                )
                continue
            span = (node.start_mark.line + 1, _end_line(node))
            docs.append(
                ManifestDocument(
                    body=body,
                    source_path=str(source_path),
                    span=span,
                    doc_index=len(docs),
                )
            )
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseFailure(str(exc), line=mark.line + 1 if mark else None) from exc
    finally:
        loader.dispose()
    return docs


def split_resources(docs: list[ManifestDocument]) -> list[ManifestDocument]:
    """Explode documents into standalone single-resource units.

    ``List``-kind wrappers are unwrapped into their items.  Every output unit
    gets ``doc_index`` 0 and a source path suffixed with a stable ordinal so
    units from one file stay distinguishable.
    """
    bodies: list[tuple[dict[str, Any], str, tuple[int, int]]] = []
    for doc in docs:
        if doc.body.get("kind") == "List" and isinstance(doc.body.get("items"), list):
            for item in doc.body["items"]:
                if isinstance(item, dict):
                    bodies.append((item, doc.source_path, doc.span))
                else:
                    logger.warning("%s: skipping non-mapping List item", doc.source_path)
        else:
            bodies.append((doc.body, doc.source_path, doc.span))
    return [
        ManifestDocument(
            body=copy.deepcopy(body),
            source_path=f"{path}#{ordinal}",
            span=span,
            doc_index=0,
        )
        for ordinal, (body, path, span) in enumerate(bodies)
    ]


def serialize(doc: ManifestDocument) -> str:
    """Emit the document as YAML, preserving key order and scalar types."""
    return yaml.safe_dump(
        doc.body,
        sort_keys=False,
        default_flow_style=False,
        indent=EMIT_INDENT,
        width=EMIT_WIDTH,
        allow_unicode=True,
    )


def resource_ref(doc: ManifestDocument) -> ResourceRef:
    """Derive the scan-report identity of a document.

    Degenerate inputs never fail: a missing kind becomes ``<unknown>``,
    a missing name ``<unnamed>``, a missing namespace ``default``.
    """
    body = doc.body
    kind = body.get("kind")
    if not isinstance(kind, str) or not kind:
        logger.warning("%s: document has no usable 'kind'", doc.source_path)
        kind = "<unknown>"
    metadata = body.get("metadata")
    if not isinstance(metadata, dict):
        metadata = {}
    name = metadata.get("name")
    if not isinstance(name, str) or not name:
        name = "<unnamed>"
    namespace = metadata.get("namespace")
    if not isinstance(namespace, str) or not namespace:
        namespace = "default"
    return ResourceRef(kind=kind, namespace=namespace, name=name)
