"""Merging per-clause minigraphs into one deduplicated contract graph.

Nodes merge by identity key with property union (longest string wins on
conflict), edges collapse to one per (source, target, kind) triple, and
dangling endpoints gain stub nodes where the edge kind makes the missing
endpoint's kind unambiguous.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .errors import AssemblyError, SchemaError
from .ingest import MiniGraph
from .ontology import (
    ENDPOINT_KINDS,
    STUB_INFERABLE_EDGE_KINDS,
    Edge,
    EdgeKind,
    Node,
    NodeKind,
    node_identity_key,
    stub_node_for_reference,
    validate_node,
)


@dataclass
class MergeReport:
    nodes_in: int = 0
    nodes_out: int = 0
    edges_in: int = 0
    edges_out: int = 0
    conflicts: int = 0
    stub_nodes: list[str] = field(default_factory=list)
    dropped_edges: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "nodes_in": self.nodes_in,
            "nodes_out": self.nodes_out,
            "edges_in": self.edges_in,
            "edges_out": self.edges_out,
            "conflicts": self.conflicts,
            "stub_nodes": sorted(self.stub_nodes),
            "dropped_edges": self.dropped_edges,
            "notes": self.notes,
        }


class ContractGraph:
    """Deduplicated directed graph for one contract, at most one edge per
    (source, target, kind) triple.

    Nodes are keyed by identity key (node.id equals the key after merge).
    Instances are treated as immutable once built.
    """

    def __init__(self, contract_id: str, nodes: dict[str, Node], edges: dict[tuple[str, str, str], Edge]):
        self.contract_id = contract_id
        self.nodes = nodes
        self.edges = edges
        self._outgoing: dict[str, tuple[Edge, ...]] = {}
        self._incoming: dict[str, tuple[Edge, ...]] = {}
        self._reindex()

    def _reindex(self) -> None:
        outgoing: dict[str, list[Edge]] = {key: [] for key in self.nodes}
        incoming: dict[str, list[Edge]] = {key: [] for key in self.nodes}
        for edge in self.edge_list():
            outgoing.setdefault(edge.source, []).append(edge)
            incoming.setdefault(edge.target, []).append(edge)
        self._outgoing = {key: tuple(edges) for key, edges in outgoing.items()}
        self._incoming = {key: tuple(edges) for key, edges in incoming.items()}

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def node_keys(self) -> list[str]:
        return sorted(self.nodes)

    def edge_list(self) -> list[Edge]:
        return [self.edges[triple] for triple in sorted(self.edges)]

    def outgoing(self, key: str) -> tuple[Edge, ...]:
        return self._outgoing.get(key, ())

    def incoming(self, key: str) -> tuple[Edge, ...]:
        return self._incoming.get(key, ())

    def check_invariants(self) -> list[str]:
        problems = []
        for edge in self.edges.values():
            for endpoint in (edge.source, edge.target):
                if endpoint not in self.nodes:
                    problems.append(f"edge endpoint {endpoint!r} missing from nodes")
        return problems


def _merge_properties(base: dict[str, str], extra: dict[str, str]) -> tuple[dict[str, str], int]:
    """Union two property maps; conflicting values keep the longer string.

    Equal-length conflicts keep the lexicographically greater value so the
    merge result never depends on input order.
    """
    merged = dict(base)
    conflicts = 0
    for key, value in extra.items():
        current = merged.get(key)
        if current is None:
            merged[key] = value
        elif current != value:
            conflicts += 1
            if (len(value), value) > (len(current), current):
                merged[key] = value
    return merged, conflicts


@dataclass
class _PendingEdge:
    source: str
    target: str
    kind: EdgeKind
    provenance: frozenset[str]
    source_resolved: bool
    target_resolved: bool


def _resolve_endpoint(
    nodes: dict[str, Node],
    raw_ref: str,
    kind: NodeKind,
    provenance: frozenset[str],
    report: MergeReport,
) -> str:
    """Map a dangling endpoint reference onto an existing or stub node key."""
    stub = stub_node_for_reference(kind, raw_ref, provenance)
    key = stub.id
    existing = nodes.get(key)
    if existing is None:
        nodes[key] = stub
        report.stub_nodes.append(key)
    else:
        nodes[key] = replace(existing, provenance=existing.provenance | provenance)
    return key


def merge_minigraphs(contract_id: str, minigraphs: list[MiniGraph]) -> tuple[ContractGraph, MergeReport]:
    """Fold minigraphs into a ContractGraph, deduplicating by identity key.

    Node property maps union across contributions and provenance sets
    accumulate every contributing clause. Dangling edge endpoints are
    resolved at the end (see resolve_dangling_edges); edges whose missing
    endpoint kind cannot be inferred are dropped and reported.
    """
    report = MergeReport()
    nodes: dict[str, Node] = {}
    pending: list[_PendingEdge] = []

    for minigraph in minigraphs:
        local: dict[str, str] = {}
        for node in minigraph.nodes:
            violations = validate_node(node)
            if violations:
                raise SchemaError(
                    f"invalid node {node.id!r} in minigraph for clause "
                    f"{minigraph.source_clause!r}: {'; '.join(violations)}"
                )
            report.nodes_in += 1
            key = node_identity_key(node)
            local[node.id] = key
            existing = nodes.get(key)
            if existing is None:
                nodes[key] = replace(node, id=key)
                continue
            if existing.kind is not node.kind:
                raise AssemblyError(
                    f"identity key {key!r} collides across kinds "
                    f"{existing.kind.value} and {node.kind.value}"
                )
            properties, conflicts = _merge_properties(existing.properties, node.properties)
            report.conflicts += conflicts
            nodes[key] = Node(
                id=key,
                kind=existing.kind,
                properties=properties,
                provenance=existing.provenance | node.provenance,
            )
        for edge in minigraph.edges:
            report.edges_in += 1
            source_key = local.get(edge.source)
            target_key = local.get(edge.target)
            pending.append(
                _PendingEdge(
                    source=source_key if source_key is not None else edge.source,
                    target=target_key if target_key is not None else edge.target,
                    kind=edge.kind,
                    provenance=edge.provenance,
                    source_resolved=source_key is not None,
                    target_resolved=target_key is not None,
                )
            )

    edges = _settle_edges(nodes, pending, report)
    report.nodes_out = len(nodes)
    report.edges_out = len(edges)
    if not minigraphs:
        report.notes.append("no minigraphs supplied; graph is empty")
    return ContractGraph(contract_id, nodes, edges), report


def _settle_edges(
    nodes: dict[str, Node],
    pending: list[_PendingEdge],
    report: MergeReport,
) -> dict[tuple[str, str, str], Edge]:
    edges: dict[tuple[str, str, str], Edge] = {}
    for item in pending:
        source_kind, target_kind = ENDPOINT_KINDS[item.kind]
        inferable = item.kind in STUB_INFERABLE_EDGE_KINDS
        source = item.source
        target = item.target
        if not item.source_resolved:
            if not inferable or not source.strip():
                report.dropped_edges.append(
                    {
                        "source": item.source,
                        "target": item.target,
                        "kind": item.kind.value,
                        "reason": "source endpoint kind not inferable",
                    }
                )
                continue
            source = _resolve_endpoint(nodes, source, source_kind, item.provenance, report)
        if not item.target_resolved:
            if not inferable or not target.strip():
                report.dropped_edges.append(
                    {
                        "source": item.source,
                        "target": item.target,
                        "kind": item.kind.value,
                        "reason": "target endpoint kind not inferable",
                    }
                )
                continue
            target = _resolve_endpoint(nodes, target, target_kind, item.provenance, report)
        triple = (source, target, item.kind.value)
        existing = edges.get(triple)
        if existing is None:
            edges[triple] = Edge(source=source, target=target, kind=item.kind, provenance=item.provenance)
        else:
            edges[triple] = replace(existing, provenance=existing.provenance | item.provenance)
    return edges


def resolve_dangling_edges(graph: ContractGraph) -> tuple[ContractGraph, MergeReport]:
    """Restore the endpoint invariant on a graph whose edges may dangle.

    Edges referencing unknown node keys gain stub nodes when the edge kind
    fixes the missing endpoint's kind; otherwise they are dropped and
    logged. A graph with no dangling edges comes back unchanged.
    """
    report = MergeReport(nodes_in=graph.node_count, edges_in=graph.edge_count)
    nodes = dict(graph.nodes)
    pending = [
        _PendingEdge(
            source=edge.source,
            target=edge.target,
            kind=edge.kind,
            provenance=edge.provenance,
            source_resolved=edge.source in nodes,
            target_resolved=edge.target in nodes,
        )
        for edge in graph.edge_list()
    ]
    edges = _settle_edges(nodes, pending, report)
    report.nodes_out = len(nodes)
    report.edges_out = len(edges)
    return ContractGraph(graph.contract_id, nodes, edges), report


def graph_to_obj(graph: ContractGraph) -> dict:
    return {
        "contract_id": graph.contract_id,
        "nodes": [
            {
                "id": node.id,
                "kind": node.kind.value,
                "properties": dict(node.properties),
                "provenance": sorted(node.provenance),
            }
            for node in (graph.nodes[key] for key in graph.node_keys())
        ],
        "edges": [
            {
                "source": edge.source,
                "target": edge.target,
                "kind": edge.kind.value,
                "provenance": sorted(edge.provenance),
            }
            for edge in graph.edge_list()
        ],
    }


def graph_to_json(graph: ContractGraph) -> str:
    return json.dumps(graph_to_obj(graph), sort_keys=True, indent=2) + "\n"


def graph_from_obj(obj: dict) -> ContractGraph:
    """Strict loader for the canonical on-disk graph format."""
    if not isinstance(obj, dict):
        raise SchemaError("graph file must be a JSON object")
    contract_id = obj.get("contract_id")
    if not isinstance(contract_id, str) or not contract_id:
        raise SchemaError("graph file: contract_id must be a non-empty string")
    nodes: dict[str, Node] = {}
    for raw in obj.get("nodes", []):
        if not isinstance(raw, dict):
            raise SchemaError("graph file: node entries must be objects")
        try:
            kind = NodeKind(raw.get("kind"))
        except ValueError as exc:
            raise SchemaError(f"graph file: unknown node kind {raw.get('kind')!r}") from exc
        node_id = raw.get("id")
        if not isinstance(node_id, str) or not node_id:
            raise SchemaError("graph file: node id must be a non-empty string")
        if node_id in nodes:
            raise SchemaError(f"graph file: duplicate node id {node_id!r}")
        properties = raw.get("properties", {})
        if not isinstance(properties, dict):
            raise SchemaError(f"graph file: node {node_id!r} properties must be an object")
        nodes[node_id] = Node(
            id=node_id,
            kind=kind,
            properties={str(k): str(v) for k, v in properties.items()},
            provenance=frozenset(raw.get("provenance", [])),
        )
    edges: dict[tuple[str, str, str], Edge] = {}
    for raw in obj.get("edges", []):
        if not isinstance(raw, dict):
            raise SchemaError("graph file: edge entries must be objects")
        try:
            kind = EdgeKind(raw.get("kind"))
        except ValueError as exc:
            raise SchemaError(f"graph file: unknown edge kind {raw.get('kind')!r}") from exc
        source = raw.get("source")
        target = raw.get("target")
        if source not in nodes or target not in nodes:
            raise SchemaError(f"graph file: edge {source!r}->{target!r} references unknown node")
        edge = Edge(
            source=source,
            target=target,
            kind=kind,
            provenance=frozenset(raw.get("provenance", [])),
        )
        if edge.triple() in edges:
            raise SchemaError(f"graph file: duplicate edge {edge.triple()}")
        edges[edge.triple()] = edge
    return ContractGraph(contract_id, nodes, edges)


def graph_from_json(text: str | bytes) -> ContractGraph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed graph JSON at offset {exc.pos}: {exc.msg}") from exc
    return graph_from_obj(obj)
