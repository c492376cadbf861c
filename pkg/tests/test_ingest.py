from __future__ import annotations

import json
import subprocess

import httpx
import pytest

from kubesecfix.ingest import (
    ChartRenderError,
    IngestError,
    PackageRef,
    RegistryClient,
    SnapshotCatalog,
    dataset_stats,
    list_top_packages,
    read_corpus_manifest,
    render_chart,
    split_and_filter,
    write_corpus_manifest,
)


@pytest.fixture()
def snapshot(fixtures_dir) -> SnapshotCatalog:
    return SnapshotCatalog(fixtures_dir / "snapshot")


def _snapshot_rendered(catalog: SnapshotCatalog, n: int = 10):
    pairs = []
    for pkg in catalog.list_top_packages(n):
        pairs.extend((pkg, path) for path in catalog.rendered_paths(pkg))
    return pairs


# --- package listing --------------------------------------------------------


def test_snapshot_lists_in_rank_order(snapshot):
    packages = list_top_packages(2, snapshot)
    assert [p.name for p in packages] == ["web-stack", "batch-tools"]
    assert [p.rank for p in packages] == [1, 2]


def test_snapshot_respects_n(snapshot):
    assert [p.name for p in list_top_packages(1, snapshot)] == ["web-stack"]
    assert list_top_packages(0, snapshot) == []


def test_missing_snapshot_is_ingest_error(tmp_path):
    with pytest.raises(IngestError):
        SnapshotCatalog(tmp_path / "nope")


def _registry_with(pages):
    def handler(request):
        assert request.url.path == "/api/v1/packages/search"
        offset = int(request.url.params["offset"])
        result = pages.get(offset)
        if result is None:
            return httpx.Response(500)
        return httpx.Response(200, json={"packages": result})

    return RegistryClient(
        "https://registry.example", page_size=2, client=httpx.Client(transport=httpx.MockTransport(handler))
    )


def _pkg_json(name):
    return {"name": name, "version": "1.0.0", "repository": {"name": "repo"}}


def test_registry_paginates_in_rank_order():
    client = _registry_with(
        {0: [_pkg_json("one"), _pkg_json("two")], 2: [_pkg_json("three"), _pkg_json("four")]}
    )
    packages = list_top_packages(3, client)
    assert [p.name for p in packages] == ["one", "two", "three"]
    assert [p.rank for p in packages] == [1, 2, 3]


def test_registry_partial_list_on_later_failure(caplog):
    client = _registry_with({0: [_pkg_json("one"), _pkg_json("two")]})
    with caplog.at_level("WARNING", logger="kubesecfix.ingest"):
        packages = list_top_packages(5, client)
    assert [p.name for p in packages] == ["one", "two"]
    assert any("partial list" in rec.message for rec in caplog.records)


def test_registry_first_page_failure_raises():
    client = _registry_with({})
    with pytest.raises(IngestError):
        list_top_packages(5, client)


# --- chart rendering ---------------------------------------------------------


def test_render_chart_missing_tool_names_it(tmp_path):
    pkg = PackageRef("demo", "repo", "1.0.0", 1)
    with pytest.raises(IngestError, match="no-such-helm"):
        render_chart(pkg, "oci://charts/demo", tmp_path, executable="no-such-helm")


def test_render_chart_writes_output(tmp_path):
    pkg = PackageRef("demo", "repo", "1.0.0", 1)

    def runner(cmd, capture_output, text, timeout):
        assert cmd[1] == "template"
        return subprocess.CompletedProcess(cmd, 0, stdout="kind: Pod\n", stderr="")

    paths = render_chart(pkg, "oci://charts/demo", tmp_path, executable="sh", runner=runner)
    assert len(paths) == 1
    assert paths[0].read_text() == "kind: Pod\n"


def test_render_chart_failure_is_skippable(tmp_path):
    pkg = PackageRef("demo", "repo", "1.0.0", 1)

    def runner(cmd, capture_output, text, timeout):
        return subprocess.CompletedProcess(cmd, 1, stdout="", stderr="required value missing")

    with pytest.raises(ChartRenderError, match="required value missing"):
        render_chart(pkg, "oci://charts/demo", tmp_path, executable="sh", runner=runner)


# --- split and filter ---------------------------------------------------------


def test_split_and_filter_keeps_only_failing_units(engine, snapshot, tmp_path):
    entries = split_and_filter(_snapshot_rendered(snapshot), engine, tmp_path / "corpus")
    # service and configmap units have no applicable findings and are dropped
    assert len(entries) == 3
    kinds = set()
    for entry in entries:
        assert entry.initial_findings, "retained entries must have failed findings"
        kinds.update(ref.split(".")[0] for _, ref in entry.initial_findings)
    assert kinds == {"Pod", "Deployment", "CronJob"}


def test_entries_rescan_to_recorded_findings(engine, snapshot, tmp_path):
    entries = split_and_filter(_snapshot_rendered(snapshot), engine, tmp_path / "corpus")
    for entry in entries:
        fresh = engine.scan_path(entry.path)
        assert tuple(sorted(fresh.failed_keys())) == entry.initial_findings


def test_reingestion_is_idempotent(engine, snapshot, tmp_path):
    first = split_and_filter(_snapshot_rendered(snapshot), engine, tmp_path / "corpus_a")
    second = split_and_filter(_snapshot_rendered(snapshot), engine, tmp_path / "corpus_b")
    assert [e.config_id for e in first] == [e.config_id for e in second]
    assert len(first) == len(second)


def test_filtered_ingestion_drops_clean_units(engine, snapshot, tmp_path):
    entries = split_and_filter(
        _snapshot_rendered(snapshot), engine, tmp_path / "corpus", check_filter={"CKV_K8S_16"}
    )
    # only the privileged backend deployment fails that check
    assert len(entries) == 1
    assert entries[0].initial_findings[0][0] == "CKV_K8S_16"


def test_unparseable_rendered_file_is_skipped(engine, tmp_path, caplog):
    bad = tmp_path / "bad.yaml"
    bad.write_text('a: "unclosed\n')
    pkg = PackageRef("broken", "repo", "1.0.0", 1)
    with caplog.at_level("WARNING", logger="kubesecfix.ingest"):
        entries = split_and_filter([(pkg, bad)], engine, tmp_path / "corpus")
    assert entries == []
    assert any("unparseable" in rec.message for rec in caplog.records)


# --- stats and manifest ---------------------------------------------------------


def test_dataset_stats_tallies_by_check(engine, snapshot, tmp_path):
    entries = split_and_filter(_snapshot_rendered(snapshot), engine, tmp_path / "corpus")
    stats = dataset_stats(entries)
    hand_tally: dict[str, int] = {}
    for entry in entries:
        for check_id, _ in entry.initial_findings:
            hand_tally[check_id] = hand_tally.get(check_id, 0) + 1
    assert stats == hand_tally
    assert stats["CKV_K8S_20"] == 3  # web pod, backend deployment, cleaner cronjob


def test_dataset_stats_empty():
    assert dataset_stats([]) == {}


def test_manifest_round_trip(engine, snapshot, tmp_path):
    entries = split_and_filter(_snapshot_rendered(snapshot), engine, tmp_path / "corpus")
    manifest = tmp_path / "corpus" / "manifest.jsonl"
    write_corpus_manifest(entries, manifest)
    assert read_corpus_manifest(manifest) == entries
    first_line = manifest.read_text().splitlines()[0]
    assert set(json.loads(first_line)) == {"config_id", "source_package", "path", "initial_findings"}
