"""Command surface tying the pipeline together.

Verbs: ``scan``, ``fix``, ``evaluate``, ``ablate``, ``ingest``, ``report``.
Exit codes are a stable contract: 0 success, 1 domain failure (findings
remain), 2 usage or IO problem, 3 unrecoverable provider failure.

Run configuration comes from a YAML file plus flag overrides; the only
environment input is the API key variable named in the provider config.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

import yaml

from kubesecfix.context import (
    ContextRetriever,
    ContextVariant,
    DocCache,
    build_policy_index,
    index_mapping,
    write_policy_index,
)
from kubesecfix.ingest import (
    ChartRenderError,
    DatasetEntry,
    IngestError,
    RegistryClient,
    SnapshotCatalog,
    dataset_stats,
    list_top_packages,
    read_corpus_manifest,
    render_chart,
    split_and_filter,
    write_corpus_manifest,
)
from kubesecfix.manifest import ParseFailure, parse_stream
from kubesecfix.metrics import (
    MetricsSummary,
    evaluation_record,
    per_category_report,
    step_curves,
    step_trace,
    summarize,
)
from kubesecfix.policy.builtin import builtin_policy_root
from kubesecfix.policy.engine import PolicyEngine, export_findings_jsonl, render_report_text
from kubesecfix.policy.external import ExternalScanError, scan_external
from kubesecfix.policy.model import ScanReport
from kubesecfix.policy.registry import register_builtin_checks
from kubesecfix.providers import (
    HttpChatProvider,
    RepairProvider,
    ScriptedProvider,
    TokenBucket,
)
from kubesecfix.repair import RepairPolicy, RepairSession, SessionStatus, repair_one
from kubesecfix.runlog import LOG_SUFFIX, load_run_sessions, write_session_log

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_PROVIDER = 3

DEFAULT_API_KEY_ENV = "KUBESECFIX_API_KEY"
CORPUS_MANIFEST_NAME = "manifest.jsonl"
RUN_MANIFEST_NAME = "run_manifest.json"
METRICS_JSON_NAME = "metrics.json"


@dataclass(frozen=True)
class ProviderSpec:
    """Which repair backend to build and how."""

    type: str = "scripted"
    endpoint: str = ""
    model: str = ""
    api_key_env: str = DEFAULT_API_KEY_ENV
    script_path: str = ""
    requests_per_minute: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": self.type,
            "endpoint": self.endpoint,
            "model": self.model,
            "api_key_env": self.api_key_env,
            "script_path": self.script_path,
            "requests_per_minute": self.requests_per_minute,
        }


@dataclass(frozen=True)
class RunConfig:
    """Fully serializable run configuration.

    A persisted RunConfig plus the session logs suffice to replay metric
    computation bit-exactly; credentials stay in the environment.
    """

    provider: ProviderSpec = field(default_factory=ProviderSpec)
    policy: RepairPolicy = field(default_factory=RepairPolicy)
    corpus: str | None = None
    run_id: str = ""
    workers: int = 1
    external_sat_enabled: bool = False
    external_sat_executable: str = "checkov"
    runs_dir: str = "runs"
    cache_dir: str = "cache"
    offline: bool = False
    policy_root: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "provider": self.provider.to_dict(),
            "policy": policy_to_dict(self.policy),
            "corpus": self.corpus,
            "run_id": self.run_id,
            "workers": self.workers,
            "external_sat": {
                "enabled": self.external_sat_enabled,
                "executable": self.external_sat_executable,
            },
            "runs_dir": self.runs_dir,
            "cache_dir": self.cache_dir,
            "offline": self.offline,
            "policy_root": self.policy_root,
        }


def policy_to_dict(policy: RepairPolicy) -> dict[str, Any]:
    return {
        "max_attempts": policy.max_attempts,
        "max_parse_retries": policy.max_parse_retries,
        "temperature": policy.temperature,
        "variant": policy.active_variant.value,
        "checks": sorted(policy.check_filter) if policy.check_filter else None,
    }


def policy_from_dict(data: dict[str, Any]) -> RepairPolicy:
    checks = data.get("checks")
    return RepairPolicy(
        max_attempts=int(data.get("max_attempts", 5)),
        max_parse_retries=int(data.get("max_parse_retries", 10)),
        temperature=float(data.get("temperature", 0.5)),
        active_variant=ContextVariant.from_string(data.get("variant", "full")),
        check_filter=frozenset(checks) if checks else None,
    )


def load_config_file(path: str | Path) -> dict[str, Any]:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must contain a mapping")
    return data


def build_provider(spec: ProviderSpec) -> RepairProvider:
    if spec.type == "scripted":
        script_path = Path(spec.script_path)
        script = json.loads(script_path.read_text(encoding="utf-8"))
        if not isinstance(script, list) or not all(isinstance(s, str) for s in script):
            raise ValueError(f"scripted provider file {script_path} must hold a JSON list of strings")
        return ScriptedProvider(script, identity=f"scripted:{script_path.name}")
    if spec.type == "http":
        if not spec.endpoint or not spec.model:
            raise ValueError("http provider requires endpoint and model")
        limiter = (
            TokenBucket(spec.requests_per_minute) if spec.requests_per_minute else None
        )
        return HttpChatProvider(
            spec.endpoint,
            spec.model,
            api_key=os.environ.get(spec.api_key_env) or None,
            rate_limiter=limiter,
        )
    raise ValueError(f"unknown provider type {spec.type!r}")


def build_retriever(cfg: RunConfig) -> ContextRetriever:
    root = Path(cfg.policy_root) if cfg.policy_root else builtin_policy_root()
    entries = build_policy_index(root)
    cache = DocCache(cfg.cache_dir, offline=cfg.offline)
    index_path = cache.cache_dir / "policy_index.csv"
    write_policy_index(entries, index_path)
    return ContextRetriever(index=index_mapping(entries), cache=cache)


def _atomic_write_json(path: Path, payload: dict[str, Any]) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def _write_curves(run_dir: Path, pr_series: list[float], aps_series: list[float]) -> None:
    with open(run_dir / "pr_over_steps.csv", "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["step", "pass_rate"])
        for t, value in enumerate(pr_series, start=1):
            writer.writerow([t, f"{value:.6f}"])
    with open(run_dir / "aps_over_steps.csv", "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["step", "average_pass_steps"])
        for t, value in enumerate(aps_series, start=1):
            writer.writerow([t, f"{value:.6f}"])


def run_evaluation(
    cfg: RunConfig,
    entries: Sequence[DatasetEntry],
    engine: PolicyEngine,
    retriever: ContextRetriever,
    provider: RepairProvider,
    run_dir: Path,
) -> MetricsSummary:
    """Repair every corpus entry, persist session logs and run artifacts."""
    run_dir.mkdir(parents=True, exist_ok=False)
    started_at = datetime.now(timezone.utc).isoformat()
    policy_snapshot = policy_to_dict(cfg.policy)

    def work(entry: DatasetEntry) -> tuple[str, RepairSession] | None:
        try:
            session = repair_one(entry.path, provider, cfg.policy, engine, retriever)
        except (OSError, ParseFailure) as exc:
            logger.error("session for %s failed: %s", entry.config_id, exc)
            return None
        write_session_log(
            run_dir / f"{entry.config_id}{LOG_SUFFIX}",
            session,
            entry.config_id,
            cfg.run_id,
            policy_snapshot,
        )
        return entry.config_id, session

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = [r for r in pool.map(work, entries) if r is not None]
    else:
        results = [r for r in map(work, entries) if r is not None]
    results.sort(key=lambda pair: pair[0])

    records = [evaluation_record(session, config_id) for config_id, session in results]
    traces = [step_trace(session, config_id) for config_id, session in results]
    summary = summarize(records, traces, max_steps=cfg.policy.max_attempts)

    pr_series, aps_series = step_curves(traces, cfg.policy.max_attempts)
    _write_curves(run_dir, pr_series, aps_series)
    _atomic_write_json(run_dir / METRICS_JSON_NAME, summary.to_dict())
    (run_dir / "metrics.txt").write_text(
        summary.table_header() + "\n" + summary.table_row() + "\n", encoding="utf-8"
    )

    tallies: dict[str, int] = {}
    for _, session in results:
        tallies[session.status.value] = tallies.get(session.status.value, 0) + 1
    _atomic_write_json(
        run_dir / RUN_MANIFEST_NAME,
        {
            "run_id": cfg.run_id,
            "started_at": started_at,
            "config": cfg.to_dict(),
            "status_tallies": tallies,
            "metrics": summary.to_dict(),
            "sessions": len(results),
        },
    )
    return summary


def replay_run(run_dir: Path) -> MetricsSummary:
    """Recompute metrics from persisted logs, invoking no provider."""
    loaded = load_run_sessions(run_dir)
    if not loaded:
        raise FileNotFoundError(f"no complete session logs under {run_dir}")
    max_steps = int(loaded[0][2].get("max_attempts", 5))
    records = [evaluation_record(session, config_id) for config_id, session, _ in loaded]
    traces = [step_trace(session, config_id) for config_id, session, _ in loaded]
    return summarize(records, traces, max_steps=max_steps)


def run_ablation(
    cfg: RunConfig,
    entries: Sequence[DatasetEntry],
    engine: PolicyEngine,
    retriever: ContextRetriever,
    provider_factory: Callable[[ContextVariant], RepairProvider],
    ablation_dir: Path,
) -> dict[ContextVariant, MetricsSummary]:
    """Run one evaluation per context variant under a single ablation id."""
    summaries: dict[ContextVariant, MetricsSummary] = {}
    for variant in ContextVariant:
        variant_cfg = replace(
            cfg,
            policy=replace(cfg.policy, active_variant=variant),
            run_id=f"{cfg.run_id}/{variant.value}",
        )
        run_dir = ablation_dir / variant.value
        provider = provider_factory(variant)
        summaries[variant] = run_evaluation(
            variant_cfg, entries, engine, retriever, provider, run_dir
        )
    return summaries


def ablation_table(summaries: dict[ContextVariant, MetricsSummary]) -> str:
    lines = []
    header_written = False
    for variant in ContextVariant:
        summary = summaries[variant]
        if not header_written:
            lines.append(f"{'variant':<16} " + summary.table_header())
            header_written = True
        lines.append(f"{variant.value:<16} " + summary.table_row())
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Commands


def cmd_scan(args: argparse.Namespace, engine: PolicyEngine) -> int:
    check_filter = _check_filter(args)
    total_failed = 0
    all_findings = []
    for raw_path in args.paths:
        path = Path(raw_path)
        if args.external:
            try:
                report = scan_external(path, check_filter, executable=args.external_tool)
            except ExternalScanError as exc:
                print(f"error: external scan of {path} failed: {exc}", file=sys.stderr)
                return EXIT_USAGE
        else:
            try:
                text = path.read_text(encoding="utf-8")
                docs = parse_stream(text, source_path=path)
            except OSError as exc:
                print(f"error: cannot read {path}: {exc}", file=sys.stderr)
                return EXIT_USAGE
            except ParseFailure as exc:
                print(f"error: cannot parse {path}: {exc}", file=sys.stderr)
                return EXIT_USAGE
            report = engine.scan_documents(docs, check_filter)
        print(render_report_text(report), end="")
        total_failed += report.failed_count
        all_findings.extend(report.findings)
    if args.export:
        export_findings_jsonl(ScanReport.build(all_findings), args.export)
    return EXIT_FINDINGS if total_failed else EXIT_OK


def cmd_fix(args: argparse.Namespace, cfg: RunConfig, engine: PolicyEngine) -> int:
    path = Path(args.path)
    try:
        provider = build_provider(cfg.provider)
        retriever = build_retriever(cfg)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        session = repair_one(path, provider, cfg.policy, engine, retriever)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseFailure as exc:
        print(f"error: cannot parse {path}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    config_id = path.stem
    write_session_log(
        path.with_name(f"{path.stem}.session.jsonl"),
        session,
        config_id,
        cfg.run_id or "fix",
        policy_to_dict(cfg.policy),
    )
    if session.status is SessionStatus.PASSED:
        fixed_path = path.with_name(f"{path.stem}.fixed.yaml")
        fixed_path.write_text(session.final_config or "", encoding="utf-8")
        print(f"repaired in {session.pass_step} step(s); wrote {fixed_path}")
        return EXIT_OK
    if session.status is SessionStatus.UNRECOVERABLE:
        print(f"unrecoverable provider failure: {session.error}", file=sys.stderr)
        return EXIT_PROVIDER
    print(f"repair did not converge: {session.status.value}", file=sys.stderr)
    return EXIT_FINDINGS


def cmd_evaluate(args: argparse.Namespace, cfg: RunConfig, engine: PolicyEngine) -> int:
    corpus_dir = Path(args.corpus)
    manifest_path = corpus_dir / CORPUS_MANIFEST_NAME
    if not manifest_path.exists():
        print(f"error: corpus manifest not found: {manifest_path}", file=sys.stderr)
        return EXIT_USAGE
    entries = read_corpus_manifest(manifest_path)

    runs_dir = Path(cfg.runs_dir)
    run_dir = runs_dir / cfg.run_id

    if args.replay:
        try:
            summary = replay_run(run_dir)
        except FileNotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(summary.table_header())
        print(summary.table_row())
        stored = run_dir / METRICS_JSON_NAME
        if stored.exists():
            stored_dict = json.loads(stored.read_text(encoding="utf-8"))
            if json.dumps(stored_dict, sort_keys=True) != summary.to_json():
                print("error: replayed metrics differ from stored metrics", file=sys.stderr)
                return EXIT_FINDINGS
            print("replay matches stored metrics")
        return EXIT_OK

    if not entries:
        print("error: corpus is empty", file=sys.stderr)
        return EXIT_USAGE
    if run_dir.exists():
        print(f"error: run directory already exists: {run_dir} (reruns need fresh run ids)", file=sys.stderr)
        return EXIT_USAGE
    try:
        provider = build_provider(cfg.provider)
        retriever = build_retriever(cfg)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    summary = run_evaluation(cfg, entries, engine, retriever, provider, run_dir)
    print(summary.table_header())
    print(summary.table_row())

    manifest = json.loads((run_dir / RUN_MANIFEST_NAME).read_text(encoding="utf-8"))
    tallies = manifest["status_tallies"]
    if tallies and tallies.get(SessionStatus.UNRECOVERABLE.value, 0) == sum(tallies.values()):
        print("error: every session failed unrecoverably", file=sys.stderr)
        return EXIT_PROVIDER
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace, cfg: RunConfig, engine: PolicyEngine) -> int:
    corpus_dir = Path(args.corpus)
    manifest_path = corpus_dir / CORPUS_MANIFEST_NAME
    if not manifest_path.exists():
        print(f"error: corpus manifest not found: {manifest_path}", file=sys.stderr)
        return EXIT_USAGE
    entries = read_corpus_manifest(manifest_path)
    if not entries:
        print("error: corpus is empty", file=sys.stderr)
        return EXIT_USAGE

    ablation_dir = Path(cfg.runs_dir) / cfg.run_id
    if ablation_dir.exists():
        print(f"error: run directory already exists: {ablation_dir}", file=sys.stderr)
        return EXIT_USAGE
    try:
        retriever = build_retriever(cfg)
        # Fresh provider per variant so scripted state does not leak across runs.
        provider_factory = lambda variant: build_provider(cfg.provider)  # noqa: E731
        summaries = run_ablation(cfg, entries, engine, retriever, provider_factory, ablation_dir)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    table = ablation_table(summaries)
    (ablation_dir / "ablation.txt").write_text(table, encoding="utf-8")
    _atomic_write_json(
        ablation_dir / "ablation.json",
        {variant.value: summary.to_dict() for variant, summary in summaries.items()},
    )
    print(table, end="")
    return EXIT_OK


def cmd_ingest(args: argparse.Namespace, cfg: RunConfig, engine: PolicyEngine) -> int:
    out_dir = Path(args.out)
    check_filter = _check_filter(args)
    n = args.top

    try:
        rendered: list[tuple[Any, Path]] = []
        if args.snapshot:
            catalog = SnapshotCatalog(args.snapshot)
            packages = list_top_packages(n, catalog)
            for pkg in packages:
                paths = catalog.rendered_paths(pkg)
                if not paths:
                    logger.warning("package %s has no rendered manifests in snapshot; skipped", pkg.name)
                rendered.extend((pkg, path) for path in paths)
        else:
            client = RegistryClient(args.registry_url)
            packages = list_top_packages(n, client)
            workdir = out_dir / "rendered"
            for pkg in packages:
                try:
                    chart_ref = client.chart_url(pkg)
                    rendered.extend((pkg, path) for path in render_chart(pkg, chart_ref, workdir))
                except ChartRenderError as exc:
                    logger.warning("skipping package %s: %s", pkg.name, exc)
                except (IngestError, OSError) as exc:
                    logger.warning("skipping package %s: %s", pkg.name, exc)
    except IngestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out_dir.mkdir(parents=True, exist_ok=True)
    entries = split_and_filter(rendered, engine, out_dir, check_filter)
    write_corpus_manifest(entries, out_dir / CORPUS_MANIFEST_NAME)

    stats = dataset_stats(entries)
    with open(out_dir / "stats.csv", "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["check_id", "count"])
        for check_id, count in stats.items():
            writer.writerow([check_id, count])

    print(f"ingested {len(entries)} misconfigured unit(s) into {out_dir}")
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    manifest_path = run_dir / RUN_MANIFEST_NAME
    if not manifest_path.exists():
        print(f"error: incomplete run: missing {manifest_path}", file=sys.stderr)
        return EXIT_USAGE
    loaded = load_run_sessions(run_dir)
    if not loaded:
        print(f"error: incomplete run: no session logs under {run_dir}", file=sys.stderr)
        return EXIT_USAGE

    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    max_steps = int(manifest.get("config", {}).get("policy", {}).get("max_attempts", 5))

    records = [evaluation_record(session, config_id) for config_id, session, _ in loaded]
    traces = [step_trace(session, config_id) for config_id, session, _ in loaded]

    categories = per_category_report(records)
    with open(run_dir / "per_category.csv", "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["check_id", "attempted", "fixed", "introduced"])
        for check_id, row in categories.items():
            writer.writerow([check_id, row.attempted, row.fixed, row.introduced])

    pr_series, aps_series = step_curves(traces, max_steps)
    _write_curves(run_dir, pr_series, aps_series)

    print(f"{'check_id':<14} {'attempted':>9} {'fixed':>6} {'introduced':>10}")
    for check_id, row in categories.items():
        print(f"{check_id:<14} {row.attempted:>9} {row.fixed:>6} {row.introduced:>10}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing and config merging


def _check_filter(args: argparse.Namespace) -> frozenset[str] | None:
    raw = getattr(args, "check", None)
    if not raw:
        return None
    ids: set[str] = set()
    for chunk in raw:
        ids.update(part.strip() for part in chunk.split(",") if part.strip())
    return frozenset(ids) or None


def _add_check_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "-c",
        "--check",
        action="append",
        metavar="IDS",
        help="restrict to these check ids (comma separated, repeatable)",
    )


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML run configuration file")
    parser.add_argument("--provider", choices=["http", "scripted"], help="provider type")
    parser.add_argument("--endpoint", help="chat-completion base URL (http provider)")
    parser.add_argument("--model", help="model name (http provider)")
    parser.add_argument("--script", help="JSON list of scripted responses (scripted provider)")
    parser.add_argument("--api-key-env", help=f"env var holding the API key (default {DEFAULT_API_KEY_ENV})")
    parser.add_argument("--rpm", type=float, help="rate limit in requests per minute")
    parser.add_argument("--temperature", type=float, help="sampling temperature (default 0.5)")
    parser.add_argument("--max-attempts", type=int, help="outer repair attempt budget (default 5)")
    parser.add_argument("--max-parse-retries", type=int, help="inner parse retry budget (default 10)")
    parser.add_argument(
        "--variant",
        choices=[v.value for v in ContextVariant],
        help="context variant (default full)",
    )
    _add_check_flag(parser)
    parser.add_argument("--cache-dir", help="guideline cache directory (default cache)")
    parser.add_argument("--offline", action="store_true", default=None, help="serve guidelines from cache only")
    parser.add_argument("--policy-root", help="policy source tree for the index (default builtin catalog)")
    parser.add_argument("--runs-dir", help="base directory for run artifacts (default runs)")
    parser.add_argument("--run-id", help="run identifier (default: UTC timestamp)")
    parser.add_argument("--workers", type=int, help="parallel sessions (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kubesecfix",
        description="Detect and automatically repair Kubernetes security misconfigurations.",
    )
    parser.add_argument("--log-level", default="WARNING", help="logging level (default WARNING)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_scan = sub.add_parser("scan", help="scan files and print the findings report")
    p_scan.add_argument("paths", nargs="+", metavar="PATH")
    _add_check_flag(p_scan)
    p_scan.add_argument(
        "--external", action="store_true", help="delegate to the external scanner instead"
    )
    p_scan.add_argument("--external-tool", default="checkov", help="external scanner executable")
    p_scan.add_argument("--export", help="also write findings as line-delimited JSON records")

    p_fix = sub.add_parser("fix", help="repair one configuration file")
    p_fix.add_argument("path", metavar="PATH")
    _add_run_flags(p_fix)

    p_eval = sub.add_parser("evaluate", help="repair a whole corpus and compute metrics")
    p_eval.add_argument("corpus", metavar="CORPUS_DIR")
    p_eval.add_argument("--replay", action="store_true", help="recompute metrics from persisted logs")
    _add_run_flags(p_eval)

    p_ablate = sub.add_parser("ablate", help="evaluate once per context variant")
    p_ablate.add_argument("corpus", metavar="CORPUS_DIR")
    _add_run_flags(p_ablate)

    p_ingest = sub.add_parser("ingest", help="build a misconfiguration corpus")
    p_ingest.add_argument("--out", required=True, help="corpus output directory")
    p_ingest.add_argument("--top", type=int, default=10, help="number of top packages (default 10)")
    p_ingest.add_argument("--snapshot", help="offline snapshot directory (catalog + rendered manifests)")
    p_ingest.add_argument("--registry-url", default="https://artifacthub.io", help="registry base URL")
    _add_check_flag(p_ingest)

    p_report = sub.add_parser("report", help="emit per-category and step-curve tables for a run")
    p_report.add_argument("run_dir", metavar="RUN_DIR")

    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    file_cfg: dict[str, Any] = {}
    if getattr(args, "config", None):
        file_cfg = load_config_file(args.config)

    provider_cfg = dict(file_cfg.get("provider") or {})
    if getattr(args, "provider", None):
        provider_cfg["type"] = args.provider
    if getattr(args, "endpoint", None):
        provider_cfg["endpoint"] = args.endpoint
    if getattr(args, "model", None):
        provider_cfg["model"] = args.model
    if getattr(args, "script", None):
        provider_cfg["script_path"] = args.script
        provider_cfg.setdefault("type", "scripted")
    if getattr(args, "api_key_env", None):
        provider_cfg["api_key_env"] = args.api_key_env
    if getattr(args, "rpm", None):
        provider_cfg["requests_per_minute"] = args.rpm
    provider = ProviderSpec(
        type=provider_cfg.get("type", "scripted"),
        endpoint=provider_cfg.get("endpoint", ""),
        model=provider_cfg.get("model", ""),
        api_key_env=provider_cfg.get("api_key_env", DEFAULT_API_KEY_ENV),
        script_path=provider_cfg.get("script_path", ""),
        requests_per_minute=provider_cfg.get("requests_per_minute"),
    )

    policy_cfg = dict(file_cfg.get("policy") or {})
    if getattr(args, "temperature", None) is not None:
        policy_cfg["temperature"] = args.temperature
    if getattr(args, "max_attempts", None) is not None:
        policy_cfg["max_attempts"] = args.max_attempts
    if getattr(args, "max_parse_retries", None) is not None:
        policy_cfg["max_parse_retries"] = args.max_parse_retries
    if getattr(args, "variant", None):
        policy_cfg["variant"] = args.variant
    check_filter = _check_filter(args)
    if check_filter:
        policy_cfg["checks"] = sorted(check_filter)
    policy = policy_from_dict(policy_cfg)

    external = dict(file_cfg.get("external_sat") or {})
    run_id = getattr(args, "run_id", None) or file_cfg.get("run_id") or datetime.now(
        timezone.utc
    ).strftime("%Y%m%dT%H%M%SZ")

    return RunConfig(
        provider=provider,
        policy=policy,
        corpus=getattr(args, "corpus", None) or file_cfg.get("corpus"),
        run_id=run_id,
        workers=getattr(args, "workers", None) or int(file_cfg.get("workers", 1)),
        external_sat_enabled=bool(external.get("enabled", False)),
        external_sat_executable=external.get("executable", "checkov"),
        runs_dir=getattr(args, "runs_dir", None) or file_cfg.get("runs_dir", "runs"),
        cache_dir=getattr(args, "cache_dir", None) or file_cfg.get("cache_dir", "cache"),
        offline=(
            args.offline
            if getattr(args, "offline", None) is not None
            else bool(file_cfg.get("offline", False))
        ),
        policy_root=getattr(args, "policy_root", None) or file_cfg.get("policy_root"),
    )


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    engine = PolicyEngine(register_builtin_checks())

    if args.command == "scan":
        return cmd_scan(args, engine)
    if args.command == "report":
        return cmd_report(args)

    try:
        cfg = _merge_config(args)
    except (OSError, ValueError) as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.command == "fix":
        return cmd_fix(args, cfg, engine)
    if args.command == "evaluate":
        return cmd_evaluate(args, cfg, engine)
    if args.command == "ablate":
        return cmd_ablate(args, cfg, engine)
    if args.command == "ingest":
        return cmd_ingest(args, cfg, engine)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
