"""Corpus construction: registry listing, chart rendering, split-and-filter.

The corpus keeps only resource units that trigger at least one failed
finding; every entry's identity is a content hash, so re-ingesting the same
inputs is idempotent.  Chart rendering is delegated to the external ``helm``
command; packages whose charts fail to render are skipped, never synthesized.
"""

from __future__ import annotations

import hashlib
import json
import logging
import shutil
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import httpx

from kubesecfix.manifest import ParseFailure, parse_stream, serialize, split_resources
from kubesecfix.policy.engine import PolicyEngine

logger = logging.getLogger(__name__)

DEFAULT_REGISTRY_URL = "https://artifacthub.io"
SEARCH_PAGE_SIZE = 60
DEFAULT_HELM = "helm"
CONFIG_ID_LENGTH = 16


class IngestError(Exception):
    """Corpus construction cannot proceed."""


class ChartRenderError(IngestError):
    """One chart failed to render; the package is skippable."""


@dataclass(frozen=True)
class PackageRef:
    """One registry package in popularity order (rank 1 is most popular)."""

    name: str
    repository: str
    version: str
    rank: int


@dataclass(frozen=True)
class DatasetEntry:
    """One retained misconfigured unit plus the findings that justified it."""

    config_id: str
    source_package: PackageRef
    path: str
    initial_findings: tuple[tuple[str, str], ...]


class RegistryClient:
    """Paginated package-search client for an ArtifactHub-style REST API."""

    def __init__(
        self,
        base_url: str = DEFAULT_REGISTRY_URL,
        page_size: int = SEARCH_PAGE_SIZE,
        timeout: float = 30.0,
        client: httpx.Client | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.page_size = page_size
        self._client = client or httpx.Client(timeout=timeout, follow_redirects=True)

    def list_top_packages(self, n: int) -> list[PackageRef]:
        """Fetch the n most popular packages in rank order.

        A failure after the first page returns the partial list with the
        cutoff logged; a failure on the first page raises IngestError.
        """
        packages: list[PackageRef] = []
        offset = 0
        while len(packages) < n:
            limit = min(self.page_size, n - len(packages))
            try:
                response = self._client.get(
                    f"{self.base_url}/api/v1/packages/search",
                    params={"kind": 0, "limit": limit, "offset": offset, "sort": "relevance"},
                )
                response.raise_for_status()
                page = response.json().get("packages", [])
            except (httpx.HTTPError, ValueError) as exc:
                if not packages:
                    raise IngestError(f"registry search failed: {exc}") from exc
                logger.warning(
                    "registry search failed at offset %d; keeping partial list of %d: %s",
                    offset,
                    len(packages),
                    exc,
                )
                return packages
            if not page:
                break
            for item in page:
                repository = item.get("repository") or {}
                packages.append(
                    PackageRef(
                        name=str(item.get("name", "")),
                        repository=str(repository.get("name", "")),
                        version=str(item.get("version", "")),
                        rank=len(packages) + 1,
                    )
                )
                if len(packages) >= n:
                    break
            offset += limit
        return packages

    def chart_url(self, pkg: PackageRef) -> str:
        """Resolve the chart archive URL via the package detail endpoint."""
        response = self._client.get(
            f"{self.base_url}/api/v1/packages/helm/{pkg.repository}/{pkg.name}/{pkg.version}"
        )
        response.raise_for_status()
        url = response.json().get("content_url")
        if not url:
            raise IngestError(f"package {pkg.repository}/{pkg.name} has no chart URL")
        return str(url)


class SnapshotCatalog:
    """Offline snapshot: a recorded catalog plus pre-rendered manifests.

    Layout: ``<root>/catalog.json`` with ``{"packages": [{name, repository,
    version}, ...]}`` in rank order, and ``<root>/rendered/<package-name>/``
    holding that package's rendered YAML files.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        catalog_path = self.root / "catalog.json"
        if not catalog_path.exists():
            raise IngestError(f"snapshot catalog not found: {catalog_path}")
        data = json.loads(catalog_path.read_text(encoding="utf-8"))
        self._packages = [
            PackageRef(
                name=item["name"],
                repository=item.get("repository", ""),
                version=item.get("version", ""),
                rank=rank,
            )
            for rank, item in enumerate(data.get("packages", []), start=1)
        ]

    def list_top_packages(self, n: int) -> list[PackageRef]:
        return self._packages[:n]

    def rendered_paths(self, pkg: PackageRef) -> list[Path]:
        rendered_dir = self.root / "rendered" / pkg.name
        if not rendered_dir.is_dir():
            return []
        return sorted(p for p in rendered_dir.iterdir() if p.suffix in (".yaml", ".yml"))


def list_top_packages(n: int, source: RegistryClient | SnapshotCatalog) -> list[PackageRef]:
    """List the n top-ranked packages from a live registry or a snapshot."""
    if n <= 0:
        return []
    return source.list_top_packages(n)


def render_chart(
    pkg: PackageRef,
    chart_ref: str,
    workdir: str | Path,
    executable: str = DEFAULT_HELM,
    runner: Callable = subprocess.run,
    timeout: float = 300.0,
) -> list[Path]:
    """Render one chart with default values into a multi-document YAML file.

    Raises :class:`IngestError` naming the tool when it is absent, and
    :class:`ChartRenderError` when the chart itself will not render.
    """
    if shutil.which(executable) is None:
        raise IngestError(f"chart render command {executable!r} not found on PATH")
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    cmd = [executable, "template", pkg.name, chart_ref]
    try:
        proc = runner(cmd, capture_output=True, text=True, timeout=timeout)
    except subprocess.TimeoutExpired as exc:
        raise ChartRenderError(f"{pkg.name}: render timed out after {timeout}s") from exc
    if proc.returncode != 0:
        raise ChartRenderError(f"{pkg.name}: render failed: {proc.stderr.strip()[:500]}")
    if not proc.stdout.strip():
        raise ChartRenderError(f"{pkg.name}: render produced no output")
    out_path = workdir / f"{pkg.name}.rendered.yaml"
    out_path.write_text(proc.stdout, encoding="utf-8")
    return [out_path]


def config_id_for(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:CONFIG_ID_LENGTH]


def split_and_filter(
    rendered: Sequence[tuple[PackageRef, Path]],
    engine: PolicyEngine,
    corpus_dir: str | Path,
    check_filter: frozenset[str] | set[str] | None = None,
) -> list[DatasetEntry]:
    """Split rendered files into units, keep only those with failed findings.

    Each kept unit is written to ``<corpus_dir>/<config_id>.yaml``.  Units
    whose content hashes collide with an already-kept unit are identical
    configurations and are recorded once.
    """
    corpus_dir = Path(corpus_dir)
    corpus_dir.mkdir(parents=True, exist_ok=True)
    entries: dict[str, DatasetEntry] = {}
    for pkg, path in rendered:
        try:
            text = Path(path).read_text(encoding="utf-8")
            docs = parse_stream(text, source_path=path)
        except (OSError, ParseFailure) as exc:
            logger.warning("skipping unparseable rendered file %s: %s", path, exc)
            continue
        for unit in split_resources(docs):
            unit_text = serialize(unit)
            report = engine.scan_text(unit_text, source_path=path, check_filter=check_filter)
            if report.failed_count == 0:
                continue
            config_id = config_id_for(unit_text)
            if config_id in entries:
                logger.info("duplicate unit %s from %s; keeping the first", config_id, path)
                continue
            unit_path = corpus_dir / f"{config_id}.yaml"
            unit_path.write_text(unit_text, encoding="utf-8")
            entries[config_id] = DatasetEntry(
                config_id=config_id,
                source_package=pkg,
                path=str(unit_path),
                initial_findings=tuple(sorted(report.failed_keys())),
            )
    return sorted(entries.values(), key=lambda e: e.config_id)


def dataset_stats(entries: Iterable[DatasetEntry]) -> dict[str, int]:
    """Frequency of each check id over the corpus's initial findings."""
    counts: dict[str, int] = {}
    for entry in entries:
        for check_id, _ in entry.initial_findings:
            counts[check_id] = counts.get(check_id, 0) + 1
    return dict(sorted(counts.items()))


def write_corpus_manifest(entries: Iterable[DatasetEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for entry in entries:
            handle.write(
                json.dumps(
                    {
                        "config_id": entry.config_id,
                        "source_package": {
                            "name": entry.source_package.name,
                            "repository": entry.source_package.repository,
                            "version": entry.source_package.version,
                            "rank": entry.source_package.rank,
                        },
                        "path": entry.path,
                        "initial_findings": [list(pair) for pair in entry.initial_findings],
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_corpus_manifest(path: str | Path) -> list[DatasetEntry]:
    entries = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            data = json.loads(line)
            source = data.get("source_package", {})
            entries.append(
                DatasetEntry(
                    config_id=data["config_id"],
                    source_package=PackageRef(
                        name=source.get("name", ""),
                        repository=source.get("repository", ""),
                        version=source.get("version", ""),
                        rank=source.get("rank", 0),
                    ),
                    path=data["path"],
                    initial_findings=tuple((c, r) for c, r in data.get("initial_findings", [])),
                )
            )
    return entries
