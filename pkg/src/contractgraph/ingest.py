"""Parsing of contract files and raw model-output minigraph text.

``parse_minigraph`` is total: every input maps to a classified outcome, so
partially correct generations can earn partial credit instead of failing.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from . import guards
from .errors import SchemaError
from .ontology import Edge, EdgeKind, Node, NodeKind, validate_node


class ParseQuality(str, Enum):
    VALID_SCHEMA = "VALID_SCHEMA"
    VALID_JSON_BAD_SCHEMA = "VALID_JSON_BAD_SCHEMA"
    REPAIRED = "REPAIRED"
    INVALID = "INVALID"


@dataclass(frozen=True)
class ClauseRecord:
    clause_id: str
    text: str
    level: int | None = None
    title: str | None = None


@dataclass(frozen=True)
class ContractDoc:
    contract_id: str
    metadata: dict[str, str] = field(default_factory=dict)
    clauses: list[ClauseRecord] = field(default_factory=list)


@dataclass(frozen=True)
class MiniGraph:
    """One clause's extraction output: node and edge arrays plus their source clause."""

    nodes: list[Node] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    source_clause: str = ""


@dataclass(frozen=True)
class ParseOutcome:
    classification: ParseQuality
    minigraph: MiniGraph | None = None
    diagnostics: list[str] = field(default_factory=list)


def parse_contract_file(data: bytes | str) -> ContractDoc:
    """Parse a contract JSON document into a ContractDoc.

    Unknown top-level keys are folded into metadata; clause order is
    preserved. Raises SchemaError naming the offending key or offset.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"contract file is not UTF-8 at byte offset {exc.start}") from exc
    else:
        text = data
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(
            f"malformed contract JSON at byte offset {exc.pos}: {exc.msg}"
        ) from exc
    if not isinstance(obj, dict):
        raise SchemaError("contract file must be a JSON object")
    if "contract_id" not in obj:
        raise SchemaError("missing contract_id")
    if "clauses" not in obj:
        raise SchemaError("missing clauses")
    contract_id = obj["contract_id"]
    if not isinstance(contract_id, str) or not contract_id:
        raise SchemaError("contract_id must be a non-empty string")

    metadata: dict[str, str] = {}
    for key, value in obj.items():
        if key in ("contract_id", "clauses", "metadata"):
            continue
        metadata[key] = value if isinstance(value, str) else json.dumps(value, sort_keys=True)
    declared = obj.get("metadata", {})
    if not isinstance(declared, dict):
        raise SchemaError("metadata must be an object")
    for key, value in declared.items():
        metadata[str(key)] = value if isinstance(value, str) else json.dumps(value, sort_keys=True)

    raw_clauses = obj["clauses"]
    if not isinstance(raw_clauses, list):
        raise SchemaError("clauses must be an array")
    clauses: list[ClauseRecord] = []
    seen_ids: set[str] = set()
    for index, raw in enumerate(raw_clauses):
        if not isinstance(raw, dict):
            raise SchemaError(f"clause {index} must be an object")
        clause_id = raw.get("clause_id")
        if not isinstance(clause_id, str) or not clause_id:
            raise SchemaError(f"clause {index}: missing clause_id")
        if clause_id in seen_ids:
            raise SchemaError(f"duplicate clause_id: {clause_id}")
        seen_ids.add(clause_id)
        clause_text = raw.get("text")
        if not isinstance(clause_text, str) or not clause_text:
            raise SchemaError(f"clause {clause_id}: text must be a non-empty string")
        level = raw.get("level")
        if level is not None:
            try:
                level = int(level)
            except (TypeError, ValueError) as exc:
                raise SchemaError(f"clause {clause_id}: level must be an integer") from exc
            if level < 0:
                raise SchemaError(f"clause {clause_id}: level must be non-negative")
        title = raw.get("title")
        if title is not None and not isinstance(title, str):
            raise SchemaError(f"clause {clause_id}: title must be a string")
        clauses.append(ClauseRecord(clause_id=clause_id, text=clause_text, level=level, title=title))
    return ContractDoc(contract_id=contract_id, metadata=metadata, clauses=clauses)


def _coerce_properties(raw: Any, context: str, diagnostics: list[str]) -> dict[str, str] | None:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        diagnostics.append(f"{context}: properties must be an object")
        return None
    properties: dict[str, str] = {}
    for key, value in raw.items():
        if isinstance(value, str):
            properties[str(key)] = value
        elif isinstance(value, (int, float, bool)):
            properties[str(key)] = json.dumps(value)
        else:
            diagnostics.append(f"{context}: property {key!r} must be a scalar")
            return None
    return properties


def minigraph_from_obj(obj: Any, source_clause: str = "") -> tuple[MiniGraph | None, list[str]]:
    """Convert a decoded JSON value into a MiniGraph, collecting diagnostics.

    Returns (minigraph, diagnostics); the minigraph is None when the value
    does not conform. Dangling edge endpoints are flagged but allowed,
    because cross-clause references are resolved at assembly time.
    Duplicate edge triples collapse with a note.
    """
    diagnostics: list[str] = []
    if not isinstance(obj, dict):
        diagnostics.append("top-level value must be an object")
        return None, diagnostics
    if "nodes" not in obj and "edges" not in obj:
        diagnostics.append("object has neither a nodes nor an edges array")
        return None, diagnostics

    raw_nodes = obj.get("nodes", [])
    raw_edges = obj.get("edges", [])
    if not isinstance(raw_nodes, list):
        diagnostics.append("nodes must be an array")
        return None, diagnostics
    if not isinstance(raw_edges, list):
        diagnostics.append("edges must be an array")
        return None, diagnostics

    provenance = frozenset({source_clause}) if source_clause else frozenset()
    nodes: list[Node] = []
    node_ids: set[str] = set()
    conforming = True
    for index, raw in enumerate(raw_nodes):
        context = f"node {index}"
        if not isinstance(raw, dict):
            diagnostics.append(f"{context}: must be an object")
            conforming = False
            continue
        node_id = raw.get("id")
        if not isinstance(node_id, str) or not node_id:
            diagnostics.append(f"{context}: id must be a non-empty string")
            conforming = False
            continue
        kind_name = raw.get("type")
        try:
            kind = NodeKind(kind_name)
        except ValueError:
            diagnostics.append(f"{context}: unknown node type {kind_name!r}")
            conforming = False
            continue
        properties = _coerce_properties(raw.get("properties"), context, diagnostics)
        if properties is None:
            conforming = False
            continue
        node = Node(id=node_id, kind=kind, properties=properties, provenance=provenance)
        violations = validate_node(node)
        if violations:
            diagnostics.extend(f"{context}: {violation}" for violation in violations)
            conforming = False
            continue
        if node_id in node_ids:
            diagnostics.append(f"{context}: duplicate node id {node_id!r}")
            conforming = False
            continue
        node_ids.add(node_id)
        nodes.append(node)

    edges: list[Edge] = []
    seen_triples: set[tuple[str, str, str]] = set()
    for index, raw in enumerate(raw_edges):
        context = f"edge {index}"
        if not isinstance(raw, dict):
            diagnostics.append(f"{context}: must be an object")
            conforming = False
            continue
        source = raw.get("source")
        target = raw.get("target")
        kind_name = raw.get("type")
        if not isinstance(source, str) or not source or not isinstance(target, str) or not target:
            diagnostics.append(f"{context}: source and target must be non-empty strings")
            conforming = False
            continue
        try:
            kind = EdgeKind(kind_name)
        except ValueError:
            diagnostics.append(f"{context}: unknown edge type {kind_name!r}")
            conforming = False
            continue
        edge = Edge(source=source, target=target, kind=kind, provenance=provenance)
        if edge.triple() in seen_triples:
            diagnostics.append(f"{context}: duplicate edge collapsed")
            continue
        seen_triples.add(edge.triple())
        for endpoint, label in ((source, "source"), (target, "target")):
            if endpoint not in node_ids:
                diagnostics.append(f"{context}: dangling {label} {endpoint!r}")
        edges.append(edge)

    if not conforming:
        return None, diagnostics
    return MiniGraph(nodes=nodes, edges=edges, source_clause=source_clause), diagnostics


def minigraph_from_json(data: str | bytes | dict, source_clause: str = "") -> MiniGraph:
    """Strict loader for trusted minigraph JSON; raises SchemaError on problems."""
    if isinstance(data, (str, bytes)):
        try:
            obj = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed minigraph JSON at offset {exc.pos}: {exc.msg}") from exc
    else:
        obj = data
    minigraph, diagnostics = minigraph_from_obj(obj, source_clause)
    if minigraph is None:
        raise SchemaError("; ".join(diagnostics) or "minigraph does not conform")
    return minigraph


def minigraph_to_obj(minigraph: MiniGraph) -> dict:
    return {
        "nodes": [
            {"id": node.id, "type": node.kind.value, "properties": dict(node.properties)}
            for node in minigraph.nodes
        ],
        "edges": [
            {"source": edge.source, "target": edge.target, "type": edge.kind.value}
            for edge in minigraph.edges
        ],
    }


def serialize_minigraph(minigraph: MiniGraph) -> str:
    return json.dumps(minigraph_to_obj(minigraph), sort_keys=True, separators=(",", ":"))


def _classify_complete(candidate: str, source_clause: str) -> ParseOutcome:
    try:
        obj = json.loads(candidate)
    except json.JSONDecodeError:
        return ParseOutcome(ParseQuality.INVALID, diagnostics=["balanced object is not valid JSON"])
    minigraph, diagnostics = minigraph_from_obj(obj, source_clause)
    if minigraph is None:
        return ParseOutcome(ParseQuality.VALID_JSON_BAD_SCHEMA, diagnostics=diagnostics)
    return ParseOutcome(ParseQuality.VALID_SCHEMA, minigraph=minigraph, diagnostics=diagnostics)


def parse_minigraph(text: str, source_clause: str = "") -> ParseOutcome:
    """Classify raw model output and extract a minigraph when possible.

    Classification ladder: VALID_SCHEMA (parses and conforms), REPAIRED
    (appending only the closing delimiters needed to balance an unterminated
    suffix yields a conforming object), VALID_JSON_BAD_SCHEMA (valid JSON
    that does not conform), INVALID (everything else). Chatter around the
    outermost balanced object is stripped before classification. Repair
    never inserts keys or commas, so near-valid structure earns credit
    without manufacturing content.
    """
    stripped = text.strip()
    if not stripped:
        return ParseOutcome(ParseQuality.INVALID, diagnostics=["empty input"])

    try:
        obj = json.loads(stripped)
    except json.JSONDecodeError:
        pass
    else:
        minigraph, diagnostics = minigraph_from_obj(obj, source_clause)
        if minigraph is None:
            return ParseOutcome(ParseQuality.VALID_JSON_BAD_SCHEMA, diagnostics=diagnostics)
        return ParseOutcome(ParseQuality.VALID_SCHEMA, minigraph=minigraph, diagnostics=diagnostics)

    start = stripped.find("{")
    if start == -1:
        return ParseOutcome(ParseQuality.INVALID, diagnostics=["no JSON object found"])

    state = guards.advance_stopper(guards.stopper_state(0), stripped[start:])
    if state.stop is not None:
        return _classify_complete(stripped[start : start + state.stop], source_clause)

    suffix = guards.closing_suffix(state)
    try:
        obj = json.loads(stripped[start:] + suffix)
    except json.JSONDecodeError:
        return ParseOutcome(ParseQuality.INVALID, diagnostics=["unterminated object is not repairable"])
    if not isinstance(obj, dict):
        return ParseOutcome(ParseQuality.INVALID, diagnostics=["repair did not produce an object"])
    minigraph, diagnostics = minigraph_from_obj(obj, source_clause)
    if minigraph is None:
        return ParseOutcome(
            ParseQuality.INVALID,
            diagnostics=["repaired object does not conform"] + diagnostics,
        )
    return ParseOutcome(
        ParseQuality.REPAIRED,
        minigraph=minigraph,
        diagnostics=[f"appended {suffix!r} to close the object"] + diagnostics,
    )
