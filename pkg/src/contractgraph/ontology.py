"""Typed vocabulary of contract graphs: node/edge kinds, schemas, identity keys.

Node and edge values are immutable after construction and safe to share
between threads. All operations here are pure functions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

from .errors import SchemaError


class NodeKind(str, Enum):
    # Extraction scope: the kinds the clause pipeline actually emits.
    CLAUSE = "CLAUSE"
    PARTY = "PARTY"
    DEFINED_TERM = "DEFINED_TERM"
    VALUE = "VALUE"
    # Extended vocabulary: accepted in inputs, never produced by assembly.
    OBLIGATION = "OBLIGATION"
    RIGHT = "RIGHT"
    PROHIBITION = "PROHIBITION"
    CONDITION = "CONDITION"
    REFERENCE = "REFERENCE"


class EdgeKind(str, Enum):
    # Extraction scope.
    IS_PART_OF = "IS_PART_OF"
    REFERENCES = "REFERENCES"
    USES = "USES"
    MENTIONS_PARTY = "MENTIONS_PARTY"
    DEFINES = "DEFINES"
    CONTAINS = "CONTAINS"
    # Extended vocabulary, accepted only.
    ASSIGNS_OBLIGATION_TO = "ASSIGNS_OBLIGATION_TO"
    GRANTS_RIGHT_TO = "GRANTS_RIGHT_TO"
    DEPENDS_ON = "DEPENDS_ON"
    MODIFIES = "MODIFIES"
    SUPERSEDES = "SUPERSEDES"
    CONTRADICTS = "CONTRADICTS"


EXTRACTION_NODE_KINDS = frozenset(
    {NodeKind.CLAUSE, NodeKind.PARTY, NodeKind.DEFINED_TERM, NodeKind.VALUE}
)

EXTRACTION_EDGE_KINDS = frozenset(
    {
        EdgeKind.IS_PART_OF,
        EdgeKind.REFERENCES,
        EdgeKind.USES,
        EdgeKind.MENTIONS_PARTY,
        EdgeKind.DEFINES,
        EdgeKind.CONTAINS,
    }
)

# The property that identifies a node of each kind. Nodes missing it cannot
# be deduplicated, so validation requires it.
REQUIRED_PROPERTY: dict[NodeKind, str] = {
    NodeKind.CLAUSE: "id",
    NodeKind.PARTY: "name",
    NodeKind.DEFINED_TERM: "term",
    NodeKind.VALUE: "amount",
    NodeKind.OBLIGATION: "action",
    NodeKind.RIGHT: "action",
    NodeKind.PROHIBITION: "action",
    NodeKind.CONDITION: "trigger",
    NodeKind.REFERENCE: "name",
}

# Endpoint kinds each edge kind connects, as (source, target).
ENDPOINT_KINDS: dict[EdgeKind, tuple[NodeKind, NodeKind]] = {
    EdgeKind.IS_PART_OF: (NodeKind.CLAUSE, NodeKind.CLAUSE),
    EdgeKind.REFERENCES: (NodeKind.CLAUSE, NodeKind.CLAUSE),
    EdgeKind.USES: (NodeKind.CLAUSE, NodeKind.DEFINED_TERM),
    EdgeKind.MENTIONS_PARTY: (NodeKind.CLAUSE, NodeKind.PARTY),
    EdgeKind.DEFINES: (NodeKind.CLAUSE, NodeKind.DEFINED_TERM),
    EdgeKind.CONTAINS: (NodeKind.CLAUSE, NodeKind.VALUE),
    EdgeKind.ASSIGNS_OBLIGATION_TO: (NodeKind.OBLIGATION, NodeKind.PARTY),
    EdgeKind.GRANTS_RIGHT_TO: (NodeKind.RIGHT, NodeKind.PARTY),
    EdgeKind.DEPENDS_ON: (NodeKind.CLAUSE, NodeKind.CLAUSE),
    EdgeKind.MODIFIES: (NodeKind.CLAUSE, NodeKind.CLAUSE),
    EdgeKind.SUPERSEDES: (NodeKind.CLAUSE, NodeKind.CLAUSE),
    EdgeKind.CONTRADICTS: (NodeKind.CLAUSE, NodeKind.CLAUSE),
}

# Edge kinds whose missing endpoints can safely be materialized as stub
# nodes. CONTRADICTS findings can in practice join elements of any kind,
# so a missing endpoint's kind stays unknown and the edge is dropped.
STUB_INFERABLE_EDGE_KINDS = frozenset(ENDPOINT_KINDS) - {EdgeKind.CONTRADICTS}


@dataclass(frozen=True)
class Node:
    """A typed graph element with a string property map and provenance.

    ``provenance`` records which clause ids contributed the node. Property
    maps stay string-valued; numeric interpretation happens at use sites.
    """

    id: str
    kind: NodeKind
    properties: dict[str, str] = field(default_factory=dict)
    provenance: frozenset[str] = frozenset()


@dataclass(frozen=True)
class Edge:
    """A directed, kind-labelled connection between two node ids."""

    source: str
    target: str
    kind: EdgeKind
    provenance: frozenset[str] = frozenset()

    def triple(self) -> tuple[str, str, str]:
        return (self.source, self.target, self.kind.value)


@dataclass(frozen=True)
class EdgeCheck:
    """Outcome of validating one edge: hard violations plus soft dangling flags."""

    violations: tuple[str, ...] = ()
    dangling: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


_WHITESPACE = re.compile(r"\s+")
_QUOTE_PAIRS = frozenset(
    {('"', '"'), ("'", "'"), ("“", "”"), ("‘", "’"), ("`", "`")}
)


def normalize_text(text: str) -> str:
    """Lowercase, collapse whitespace runs to one space, trim, strip enclosing quotes.

    Deliberately keeps interior punctuation: "abc corp." and "abc corp" stay
    distinct because over-merging parties is riskier than under-merging.
    """
    out = _WHITESPACE.sub(" ", text.lower()).strip()
    while len(out) >= 2 and (out[0], out[-1]) in _QUOTE_PAIRS:
        out = out[1:-1].strip()
    return out


def validate_node(node: Node) -> list[str]:
    """Return the list of invariant violations for ``node`` (empty means ok)."""
    violations: list[str] = []
    if not node.id:
        violations.append("node id must be non-empty")
    required = REQUIRED_PROPERTY[node.kind]
    value = node.properties.get(required)
    if value is None or not value.strip():
        violations.append(f"missing required property: {required}")
    level = node.properties.get("level")
    if level is not None:
        try:
            parsed = int(str(level).strip())
        except ValueError:
            violations.append("level must be a non-negative integer")
        else:
            if parsed < 0:
                violations.append("level must be non-negative")
    return violations


def validate_edge(edge: Edge, kind_of: Mapping[str, NodeKind]) -> EdgeCheck:
    """Check an edge's endpoint kinds against the relationship table.

    ``kind_of`` maps node ids to their kinds. Endpoints absent from the
    lookup are reported as dangling, which is non-fatal: cross-clause
    references are resolved later during assembly.
    """
    violations: list[str] = []
    dangling: list[str] = []
    want_source, want_target = ENDPOINT_KINDS[edge.kind]

    source_kind = kind_of.get(edge.source)
    if source_kind is None:
        dangling.append("dangling source")
    elif source_kind is not want_source:
        violations.append(f"{edge.kind.value} source must be {want_source.value}")

    target_kind = kind_of.get(edge.target)
    if target_kind is None:
        dangling.append("dangling target")
    elif target_kind is not want_target:
        violations.append(f"{edge.kind.value} target must be {want_target.value}")

    return EdgeCheck(violations=tuple(violations), dangling=tuple(dangling))


def node_discriminator(node: Node) -> str:
    """Normalized identifying text for a node (the part of its key after the kind)."""
    required = REQUIRED_PROPERTY[node.kind]
    raw = node.properties.get(required)
    if raw is None or not raw.strip():
        raise SchemaError(
            f"cannot build identity key: {node.kind.value} node {node.id!r} "
            f"lacks property {required!r}"
        )
    if node.kind is NodeKind.VALUE:
        # Unit is part of a value's identity: equal amounts in different
        # currencies must not merge.
        unit = normalize_text(node.properties.get("unit", ""))
        return f"{normalize_text(raw)}|{unit}"
    return normalize_text(raw)


def node_identity_key(node: Node) -> str:
    """Deterministic deduplication key: kind marker plus normalized discriminator."""
    return f"{node.kind.value}|{node_discriminator(node)}"


def stub_node_for_reference(kind: NodeKind, raw_ref: str, provenance: frozenset[str]) -> Node:
    """Minimal node materializing a dangling endpoint reference.

    The node id is its identity key, so equal references collapse and an
    explicit node for the same element lands on the same key.
    """
    stub = Node(id=raw_ref, kind=kind, properties={REQUIRED_PROPERTY[kind]: raw_ref}, provenance=provenance)
    return Node(
        id=node_identity_key(stub),
        kind=kind,
        properties=stub.properties,
        provenance=provenance,
    )
