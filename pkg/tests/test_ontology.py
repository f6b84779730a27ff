import pytest
from hypothesis import given
from hypothesis import strategies as st

from contractgraph.errors import SchemaError
from contractgraph.ontology import (
    ENDPOINT_KINDS,
    EXTRACTION_EDGE_KINDS,
    EXTRACTION_NODE_KINDS,
    Edge,
    EdgeKind,
    Node,
    NodeKind,
    node_identity_key,
    normalize_text,
    validate_edge,
    validate_node,
)


def make_node(kind: NodeKind, **properties: str) -> Node:
    return Node(id="n1", kind=kind, properties=properties)


class TestValidateNode:
    def test_clause_with_id_is_ok(self):
        assert validate_node(make_node(NodeKind.CLAUSE, id="3.1")) == []

    def test_missing_term_is_reported(self):
        violations = validate_node(make_node(NodeKind.DEFINED_TERM))
        assert violations == ["missing required property: term"]

    def test_negative_level_is_reported(self):
        violations = validate_node(make_node(NodeKind.CLAUSE, id="2", level="-1"))
        assert violations == ["level must be non-negative"]

    def test_non_integer_level(self):
        violations = validate_node(make_node(NodeKind.CLAUSE, id="2", level="deep"))
        assert violations == ["level must be a non-negative integer"]

    def test_empty_id_rejected(self):
        node = Node(id="", kind=NodeKind.PARTY, properties={"name": "Acme"})
        assert "node id must be non-empty" in validate_node(node)

    def test_extraction_scope_is_the_four_kinds(self):
        assert EXTRACTION_NODE_KINDS == {
            NodeKind.CLAUSE,
            NodeKind.PARTY,
            NodeKind.DEFINED_TERM,
            NodeKind.VALUE,
        }
        assert len(EXTRACTION_EDGE_KINDS) == 6


class TestValidateEdge:
    KINDS = {
        "c1": NodeKind.CLAUSE,
        "c2": NodeKind.CLAUSE,
        "t": NodeKind.DEFINED_TERM,
        "p": NodeKind.PARTY,
        "v": NodeKind.VALUE,
        "o": NodeKind.OBLIGATION,
        "r": NodeKind.RIGHT,
    }

    def check(self, src, dst, kind):
        return validate_edge(Edge(source=src, target=dst, kind=kind), self.KINDS)

    def test_is_part_of_clause_to_clause(self):
        assert self.check("c1", "c2", EdgeKind.IS_PART_OF).ok

    def test_defines_wrong_target(self):
        outcome = self.check("c1", "p", EdgeKind.DEFINES)
        assert outcome.violations == ("DEFINES target must be DEFINED_TERM",)

    def test_unknown_target_is_dangling_not_fatal(self):
        outcome = self.check("c1", "missing", EdgeKind.REFERENCES)
        assert outcome.ok
        assert outcome.dangling == ("dangling target",)

    def test_every_extraction_pair_accepted_and_swaps_rejected(self):
        endpoint_ids = {
            NodeKind.CLAUSE: "c1",
            NodeKind.DEFINED_TERM: "t",
            NodeKind.PARTY: "p",
            NodeKind.VALUE: "v",
            NodeKind.OBLIGATION: "o",
            NodeKind.RIGHT: "r",
        }
        for kind in EXTRACTION_EDGE_KINDS:
            want_src, want_dst = ENDPOINT_KINDS[kind]
            good = self.check(endpoint_ids[want_src], endpoint_ids[want_dst], kind)
            assert good.ok, kind
            for other_kind, other_id in endpoint_ids.items():
                if other_kind is want_dst:
                    continue
                bad = self.check(endpoint_ids[want_src], other_id, kind)
                assert not bad.ok, (kind, other_kind)

    def test_extended_kinds_validate(self):
        assert self.check("o", "p", EdgeKind.ASSIGNS_OBLIGATION_TO).ok
        assert self.check("r", "p", EdgeKind.GRANTS_RIGHT_TO).ok
        assert not self.check("c1", "p", EdgeKind.ASSIGNS_OBLIGATION_TO).ok


class TestIdentityKey:
    def test_whitespace_collapse(self):
        node = make_node(NodeKind.DEFINED_TERM, term="Confidential  Information")
        assert node_identity_key(node) == "DEFINED_TERM|confidential information"

    def test_trim_equivalence(self):
        a = make_node(NodeKind.CLAUSE, id="3.1")
        b = make_node(NodeKind.CLAUSE, id=" 3.1 ")
        assert node_identity_key(a) == node_identity_key(b)

    def test_party_keeps_punctuation(self):
        node = make_node(NodeKind.PARTY, name="ABC Corp.")
        assert node_identity_key(node) == "PARTY|abc corp."

    def test_value_identity_includes_unit(self):
        usd = make_node(NodeKind.VALUE, amount="5,000,000", unit="USD")
        eur = make_node(NodeKind.VALUE, amount="5,000,000", unit="EUR")
        assert node_identity_key(usd) != node_identity_key(eur)

    def test_missing_discriminator_raises(self):
        with pytest.raises(SchemaError):
            node_identity_key(make_node(NodeKind.PARTY))

    def test_enclosing_quotes_stripped(self):
        quoted = make_node(NodeKind.DEFINED_TERM, term='"Confidential Information"')
        plain = make_node(NodeKind.DEFINED_TERM, term="Confidential Information")
        assert node_identity_key(quoted) == node_identity_key(plain)

    @given(st.text(min_size=1, max_size=40).filter(lambda s: normalize_text(s)))
    def test_key_stable_under_pre_normalization(self, raw):
        node = make_node(NodeKind.DEFINED_TERM, term=raw)
        pre_normalized = make_node(NodeKind.DEFINED_TERM, term=normalize_text(raw))
        assert node_identity_key(node) == node_identity_key(pre_normalized)


@given(st.text(max_size=80))
def test_normalize_is_idempotent(text):
    once = normalize_text(text)
    assert normalize_text(once) == once


@given(st.text(min_size=1, max_size=40).filter(lambda s: s.strip()))
def test_equal_keys_imply_equal_kinds(raw):
    nodes = [
        Node(id="a", kind=kind, properties={prop: raw})
        for kind, prop in (
            (NodeKind.CLAUSE, "id"),
            (NodeKind.DEFINED_TERM, "term"),
            (NodeKind.PARTY, "name"),
            (NodeKind.VALUE, "amount"),
        )
    ]
    keys = {}
    for node in nodes:
        key = node_identity_key(node)
        assert keys.setdefault(key, node.kind) is node.kind
    assert len(keys) == len(nodes)
