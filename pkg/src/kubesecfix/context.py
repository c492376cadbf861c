"""Per-failure repair context: scan text, policy source text, guideline text.

The retrieval mechanism is deterministic keyed lookup: check id to source
file through a CSV index, guideline URL to cached documentation text.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from html.parser import HTMLParser
from pathlib import Path
from typing import Mapping

import httpx

from kubesecfix.policy.engine import render_report_text
from kubesecfix.policy.model import ScanReport

logger = logging.getLogger(__name__)

ID_DECLARATION = re.compile(r"\bid\s*=\s*[\"'](CKV_K8S_\d+)[\"']")
INDEX_HEADER = ("check_id", "source_path")
DEFAULT_SLOT_BUDGET = 8000
TRUNCATION_MARKER = "\n[...truncated]"


class GuidelineUnavailable(Exception):
    """Guideline text cannot be served (cold cache offline, or fetch failed)."""


class ContextVariant(Enum):
    SCAN_ONLY = "scan-only"
    SCAN_PLUS_CODE = "scan-plus-code"
    SCAN_PLUS_DOCS = "scan-plus-docs"
    FULL = "full"

    @property
    def includes_code(self) -> bool:
        return self in (ContextVariant.SCAN_PLUS_CODE, ContextVariant.FULL)

    @property
    def includes_docs(self) -> bool:
        return self in (ContextVariant.SCAN_PLUS_DOCS, ContextVariant.FULL)

    @classmethod
    def from_string(cls, value: str) -> "ContextVariant":
        for variant in cls:
            if variant.value == value:
                return variant
        raise ValueError(f"unknown context variant {value!r}")


@dataclass(frozen=True)
class PolicyIndexEntry:
    check_id: str
    source_path: str


@dataclass(frozen=True)
class RepairContext:
    """Assembled prompt inputs for one repair session.

    ``scan_text`` is always present; the auxiliary lists are populated only
    when the variant asks for them, at most one entry per failed check id.
    """

    scan_text: str
    policy_sources: tuple[tuple[str, str], ...]
    guideline_texts: tuple[tuple[str, str], ...]
    variant: ContextVariant


def build_policy_index(policy_root: str | Path) -> list[PolicyIndexEntry]:
    """Scan a policy source tree for id declarations.

    One entry per declared check id; when two files declare the same id the
    first (in sorted path order) wins and a warning is logged.
    """
    root = Path(policy_root)
    entries: dict[str, PolicyIndexEntry] = {}
    for path in sorted(root.rglob("*.py")):
        try:
            text = path.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            logger.warning("skipping unreadable policy file %s: %s", path, exc)
            continue
        for match in ID_DECLARATION.finditer(text):
            check_id = match.group(1)
            if check_id in entries:
                logger.warning(
                    "check id %s declared in both %s and %s; keeping the first",
                    check_id,
                    entries[check_id].source_path,
                    path,
                )
                continue
            entries[check_id] = PolicyIndexEntry(check_id=check_id, source_path=str(path))
    return sorted(entries.values(), key=lambda e: e.check_id)


def write_policy_index(entries: list[PolicyIndexEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(INDEX_HEADER)
        for entry in entries:
            writer.writerow([entry.check_id, entry.source_path])


def read_policy_index(path: str | Path) -> list[PolicyIndexEntry]:
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is not None and tuple(header) != INDEX_HEADER:
            raise ValueError(f"unexpected index header {header!r}")
        return [PolicyIndexEntry(check_id=row[0], source_path=row[1]) for row in reader if row]


def index_mapping(entries: list[PolicyIndexEntry]) -> dict[str, str]:
    return {entry.check_id: entry.source_path for entry in entries}


class _TextExtractor(HTMLParser):
    """Reduce an HTML page to headings, paragraphs, list items and code.

    Navigation, script and style content is dropped; ``pre`` blocks are
    preserved verbatim inside fences since example configurations are the
    valuable payload of a guideline page.
    """

    DROP_TAGS = {"script", "style", "nav", "header", "footer", "aside", "noscript"}
    HEADINGS = {"h1", "h2", "h3", "h4", "h5", "h6"}

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.blocks: list[str] = []
        self._drop_depth = 0
        self._pre_depth = 0
        self._buffer: list[str] = []
        self._prefix = ""

    def _flush(self) -> None:
        text = "".join(self._buffer)
        if self._pre_depth == 0:
            text = " ".join(text.split())
        else:
            text = text.strip("\n")
        if text:
            self.blocks.append(self._prefix + text)
        self._buffer = []
        self._prefix = ""

    def handle_starttag(self, tag, attrs):
        if tag in self.DROP_TAGS:
            self._drop_depth += 1
            return
        if self._drop_depth:
            return
        if tag == "pre":
            self._flush()
            self._pre_depth += 1
        elif tag in self.HEADINGS:
            self._flush()
            self._prefix = "#" * int(tag[1]) + " "
        elif tag == "li":
            self._flush()
            self._prefix = "- "
        elif tag in ("p", "div", "tr", "br", "table", "ul", "ol"):
            self._flush()

    def handle_endtag(self, tag):
        if tag in self.DROP_TAGS:
            self._drop_depth = max(0, self._drop_depth - 1)
            return
        if self._drop_depth:
            return
        if tag == "pre":
            text = "".join(self._buffer).strip("\n")
            self.blocks.append("```\n" + text + "\n```")
            self._buffer = []
            self._prefix = ""
            self._pre_depth = max(0, self._pre_depth - 1)
        elif tag in self.HEADINGS or tag in ("p", "li", "div", "tr"):
            self._flush()

    def handle_data(self, data):
        if self._drop_depth:
            return
        self._buffer.append(data)


def extract_text(html: str) -> str:
    parser = _TextExtractor()
    parser.feed(html)
    parser.close()
    parser._flush()
    return "\n".join(parser.blocks).strip() + "\n"


@dataclass(frozen=True)
class DocCacheEntry:
    """One cached guideline page: raw payload plus its extracted text."""

    url: str
    fetched_at: str
    raw: bytes
    extracted_text: str


class DocCache:
    """Disk-backed guideline cache keyed by URL.

    Layout: ``<cache_dir>/<sha256(url)>.{raw,txt,meta}``.  Extraction is
    deterministic, so a warm cache always serves identical text with zero
    network calls.  In offline mode only cache hits are served.
    """

    def __init__(
        self,
        cache_dir: str | Path,
        offline: bool = False,
        timeout: float = 20.0,
        client: httpx.Client | None = None,
    ):
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        self.offline = offline
        self.timeout = timeout
        self._client = client

    @staticmethod
    def key(url: str) -> str:
        return hashlib.sha256(url.encode("utf-8")).hexdigest()

    def _paths(self, url: str) -> tuple[Path, Path, Path]:
        key = self.key(url)
        return (
            self.cache_dir / f"{key}.raw",
            self.cache_dir / f"{key}.txt",
            self.cache_dir / f"{key}.meta",
        )

    def store(self, url: str, raw: bytes) -> str:
        """Insert a raw payload (fetched or vendored) and return its text."""
        raw_path, txt_path, meta_path = self._paths(url)
        text = extract_text(raw.decode("utf-8", errors="replace"))
        raw_path.write_bytes(raw)
        txt_path.write_text(text, encoding="utf-8")
        meta_path.write_text(
            json.dumps(
                {"url": url, "fetched_at": datetime.now(timezone.utc).isoformat()},
                sort_keys=True,
            ),
            encoding="utf-8",
        )
        return text

    def entry(self, url: str) -> DocCacheEntry | None:
        raw_path, txt_path, meta_path = self._paths(url)
        if not (raw_path.exists() and txt_path.exists() and meta_path.exists()):
            return None
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        return DocCacheEntry(
            url=meta.get("url", url),
            fetched_at=meta.get("fetched_at", ""),
            raw=raw_path.read_bytes(),
            extracted_text=txt_path.read_text(encoding="utf-8"),
        )

    def fetch(self, url: str) -> str:
        _, txt_path, _ = self._paths(url)
        if txt_path.exists():
            return txt_path.read_text(encoding="utf-8")
        if self.offline:
            raise GuidelineUnavailable(f"offline and no cached copy of {url}")
        client = self._client
        try:
            if client is None:
                response = httpx.get(url, timeout=self.timeout, follow_redirects=True)
            else:
                response = client.get(url)
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise GuidelineUnavailable(f"failed to fetch {url}: {exc}") from exc
        return self.store(url, response.content)


def fetch_guideline(url: str, cache: DocCache) -> str:
    """Fetch (or serve from cache) the extracted text of a guideline page."""
    return cache.fetch(url)


def _truncate(text: str, budget: int) -> str:
    if len(text) <= budget:
        return text
    return text[:budget] + TRUNCATION_MARKER


def assemble_context(
    report: ScanReport,
    variant: ContextVariant,
    index: Mapping[str, str],
    cache: DocCache | None,
    slot_budget: int = DEFAULT_SLOT_BUDGET,
) -> RepairContext:
    """Assemble the repair context for one failed configuration.

    Auxiliary slots are deduplicated per failed check id and ordered by id;
    a missing index entry or unavailable guideline leaves that slot empty
    and is logged, never fatal.
    """
    scan_text = _truncate(render_report_text(report), slot_budget)
    failed = sorted({f.check_id for f in report.failed_findings()})
    guideline_urls = {f.check_id: f.guideline_url for f in report.failed_findings()}

    policy_sources: list[tuple[str, str]] = []
    if variant.includes_code:
        for check_id in failed:
            source_path = index.get(check_id)
            if source_path is None:
                logger.warning("no policy index entry for %s; source slot left empty", check_id)
                continue
            try:
                text = Path(source_path).read_text(encoding="utf-8")
            except OSError as exc:
                logger.warning("cannot read policy source for %s: %s", check_id, exc)
                continue
            policy_sources.append((check_id, _truncate(text, slot_budget)))

    guideline_texts: list[tuple[str, str]] = []
    if variant.includes_docs and cache is not None:
        for check_id in failed:
            url = guideline_urls.get(check_id)
            if not url:
                continue
            try:
                text = cache.fetch(url)
            except GuidelineUnavailable as exc:
                logger.warning("guideline for %s unavailable: %s", check_id, exc)
                continue
            guideline_texts.append((check_id, _truncate(text, slot_budget)))

    return RepairContext(
        scan_text=scan_text,
        policy_sources=tuple(policy_sources),
        guideline_texts=tuple(guideline_texts),
        variant=variant,
    )


@dataclass(frozen=True)
class ContextRetriever:
    """Bundles the policy index and guideline cache behind one assemble call."""

    index: Mapping[str, str]
    cache: DocCache | None = None
    slot_budget: int = DEFAULT_SLOT_BUDGET

    def assemble(self, report: ScanReport, variant: ContextVariant) -> RepairContext:
        return assemble_context(report, variant, self.index, self.cache, self.slot_budget)
