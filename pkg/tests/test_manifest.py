from __future__ import annotations

import pytest

from kubesecfix.manifest import (
    ManifestDocument,
    ParseFailure,
    ResourceRef,
    parse_stream,
    resource_ref,
    serialize,
    split_resources,
)


def test_canonical_pod_parses_with_full_span(insecure_pod_text):
    docs = parse_stream(insecure_pod_text, "pod_insecure.yaml")
    assert len(docs) == 1
    doc = docs[0]
    assert doc.body["kind"] == "Pod"
    assert doc.span == (1, 10)
    assert doc.doc_index == 0


def test_empty_stream_yields_no_documents():
    assert parse_stream("", "empty.yaml") == []
    assert parse_stream("---\n---\n", "seps.yaml") == []


def test_two_documents_have_disjoint_spans(fixtures_dir):
    text = (fixtures_dir / "multi_doc.yaml").read_text()
    docs = parse_stream(text, "multi_doc.yaml")
    assert [d.doc_index for d in docs] == [0, 1]
    (s1, e1), (s2, e2) = docs[0].span, docs[1].span
    assert s1 <= e1 < s2 <= e2
    # independently count lines: first doc is the 10-line pod
    assert (s1, e1) == (1, 10)


def test_malformed_yaml_raises_parse_failure():
    with pytest.raises(ParseFailure):
        parse_stream('key: "unclosed\nother: 1\n', "bad.yaml")
    with pytest.raises(ParseFailure):
        parse_stream("a:\n  - b\n c\n", "bad_indent.yaml")


def test_duplicate_keys_last_wins(caplog):
    with caplog.at_level("WARNING", logger="kubesecfix.manifest"):
        docs = parse_stream("kind: Pod\nkind: Service\n", "dup.yaml")
    assert docs[0].body["kind"] == "Service"
    assert any("duplicate mapping key" in rec.message for rec in caplog.records)


def test_anchors_are_expanded():
    text = "kind: Pod\nmetadata: &m\n  name: web\nspec:\n  other: *m\n"
    docs = parse_stream(text, "anchored.yaml")
    assert docs[0].body["spec"]["other"] == {"name": "web"}


def test_non_mapping_documents_are_skipped():
    docs = parse_stream("just a string\n---\nkind: Pod\n", "mixed.yaml")
    assert len(docs) == 1
    assert docs[0].body == {"kind": "Pod"}


def test_serialize_round_trips_canonical_pod_bytes(insecure_pod_text):
    docs = parse_stream(insecure_pod_text, "pod_insecure.yaml")
    assert serialize(docs[0]) == insecure_pod_text


def test_serialize_preserves_scalar_types():
    doc = ManifestDocument(
        body={"kind": "Pod", "enabled": False, "label": "false"}, source_path="x"
    )
    text = serialize(doc)
    assert "enabled: false" in text
    assert "label: 'false'" in text
    reparsed = parse_stream(text, "x")[0]
    assert reparsed.body == doc.body


def test_serialize_reparse_structural_equality(fixtures_dir):
    for path in sorted(fixtures_dir.rglob("*.yaml")):
        docs = parse_stream(path.read_text(), path)
        for doc in docs:
            again = parse_stream(serialize(doc), path)
            assert len(again) == 1
            assert again[0].body == doc.body


def test_split_preserves_counts(fixtures_dir):
    docs = parse_stream((fixtures_dir / "multi_doc.yaml").read_text(), "multi_doc.yaml")
    units = split_resources(docs)
    assert len(units) == 2
    assert all(u.doc_index == 0 for u in units)
    assert [u.source_path for u in units] == ["multi_doc.yaml#0", "multi_doc.yaml#1"]


def test_split_single_document_keeps_content(insecure_pod_text):
    docs = parse_stream(insecure_pod_text, "pod.yaml")
    units = split_resources(docs)
    assert len(units) == 1
    assert units[0].body == docs[0].body


def test_split_unwraps_list_kind(fixtures_dir):
    docs = parse_stream((fixtures_dir / "list_wrapper.yaml").read_text(), "list.yaml")
    units = split_resources(docs)
    assert len(units) == 2
    assert [u.body["metadata"]["name"] for u in units] == ["first", "second"]
    assert all(u.body["kind"] == "Pod" for u in units)


def test_resource_ref_formats():
    docs = parse_stream(
        "kind: Pod\nmetadata:\n  name: web\n", "a.yaml"
    ) + parse_stream(
        "kind: Deployment\nmetadata:\n  name: api\n  namespace: prod\n", "b.yaml"
    )
    assert str(resource_ref(docs[0])) == "Pod.default.web"
    assert str(resource_ref(docs[1])) == "Deployment.prod.api"


def test_resource_ref_degenerate(fixtures_dir):
    docs = parse_stream((fixtures_dir / "no_metadata.yaml").read_text(), "no_metadata.yaml")
    assert str(resource_ref(docs[0])) == "Pod.default.<unnamed>"
    missing_kind = parse_stream("metadata:\n  name: x\n", "c.yaml")
    assert resource_ref(missing_kind[0]) == ResourceRef(kind="<unknown>", name="x")
