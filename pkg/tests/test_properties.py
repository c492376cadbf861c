from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from kubesecfix.manifest import ManifestDocument, parse_stream, serialize, split_resources

from strategies import (
    assert_diff_identities,
    assert_session_invariants,
    report_pairs,
    synthetic_outcomes,
)

_scalar = st.one_of(
    st.booleans(),
    st.integers(min_value=-(10**9), max_value=10**9),
    st.text(
        alphabet=st.characters(min_codepoint=32, max_codepoint=0x2FF), max_size=20
    ),
    st.none(),
)

_tree = st.recursive(
    _scalar,
    lambda children: st.one_of(
        st.lists(children, max_size=4),
        st.dictionaries(
            st.text(
                alphabet=st.characters(min_codepoint=48, max_codepoint=122), min_size=1, max_size=10
            ),
            children,
            max_size=4,
        ),
    ),
    max_leaves=20,
)


@given(tree=_tree)
def test_serialize_parse_round_trip(tree):
    doc = ManifestDocument(body={"kind": "Test", "data": tree}, source_path="synthetic.yaml")
    text = serialize(doc)
    parsed = parse_stream(text, "synthetic.yaml")
    assert len(parsed) == 1
    assert parsed[0].body == doc.body


@given(trees=st.lists(_tree, min_size=1, max_size=4))
def test_multi_document_stream_round_trip(trees):
    docs = [
        ManifestDocument(body={"kind": "Test", "index": i, "data": tree}, source_path="s.yaml")
        for i, tree in enumerate(trees)
    ]
    stream = "---\n".join(serialize(d) for d in docs)
    parsed = parse_stream(stream, "s.yaml")
    assert [d.body for d in parsed] == [d.body for d in docs]
    units = split_resources(parsed)
    assert [u.body for u in units] == [d.body for d in docs]


@settings(deadline=None)
@given(outcomes=synthetic_outcomes())
def test_metric_invariants_over_synthetic_sessions(outcomes):
    assert_session_invariants(outcomes)


@settings(deadline=None)
@given(pair=report_pairs)
def test_diff_identities_over_random_reports(pair):
    assert_diff_identities(pair)
