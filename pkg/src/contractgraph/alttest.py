"""Statistical test deciding whether LLM annotations may replace human ones.

For each annotator, the LLM competes against them on every instance: both
are compared to the leave-one-out consensus of the remaining humans, and
the LLM scores a win when it sits at least as close (after an epsilon
handicap). Per-annotator win rates are tested against chance with an exact
one-sided binomial and corrected with Benjamini-Yekutieli FDR.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ConfigError, SchemaError
from .ingest import MiniGraph, minigraph_from_json
from .ontology import Edge, EdgeKind, Node, node_identity_key
from .reward import align_graphs, micro_prf

TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class AnnotationTable:
    """Parallel annotations: every human and the LLM labelled every instance."""

    instances: list[str]
    humans: dict[str, dict[str, MiniGraph]]
    llm: dict[str, MiniGraph]

    def validate(self) -> None:
        if len(self.humans) < 3:
            raise ConfigError("insufficient annotators: need at least 3 humans")
        if not self.instances:
            raise ConfigError("annotation table has no instances")
        for annotator, cells in self.humans.items():
            missing = [i for i in self.instances if i not in cells]
            if missing:
                raise SchemaError(f"annotator {annotator!r} missing instances: {missing}")
        missing = [i for i in self.instances if i not in self.llm]
        if missing:
            raise SchemaError(f"llm annotations missing instances: {missing}")

    @classmethod
    def from_obj(cls, obj: dict) -> "AnnotationTable":
        if not isinstance(obj, dict):
            raise SchemaError("annotation table must be a JSON object")
        instances = obj.get("instances")
        if not isinstance(instances, list) or not all(isinstance(i, str) for i in instances):
            raise SchemaError("instances must be an array of ids")
        humans_raw = obj.get("humans")
        if not isinstance(humans_raw, dict):
            raise SchemaError("humans must be an object of annotator id -> annotations")
        llm_raw = obj.get("llm")
        if not isinstance(llm_raw, dict):
            raise SchemaError("llm must be an object of instance id -> minigraph")
        humans = {
            str(annotator): {
                str(instance): minigraph_from_json(cell, source_clause=str(instance))
                for instance, cell in cells.items()
            }
            for annotator, cells in humans_raw.items()
        }
        llm = {
            str(instance): minigraph_from_json(cell, source_clause=str(instance))
            for instance, cell in llm_raw.items()
        }
        table = cls(instances=[str(i) for i in instances], humans=humans, llm=llm)
        table.validate()
        return table

    @classmethod
    def from_json(cls, text: str | bytes) -> "AnnotationTable":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed annotation table JSON: {exc.msg}") from exc
        return cls.from_obj(obj)


@dataclass(frozen=True)
class AnnotatorResult:
    annotator: str
    advantage_probability: float
    p_value: float
    rejected: bool


@dataclass(frozen=True)
class AltTestReport:
    annotators: list[AnnotatorResult]
    omega: float
    average_advantage: float
    epsilon: float
    q: float

    @property
    def passed(self) -> bool:
        return self.omega >= 0.5

    def to_obj(self) -> dict:
        return {
            "annotators": [
                {
                    "annotator": r.annotator,
                    "advantage_probability": r.advantage_probability,
                    "p_value": r.p_value,
                    "rejected": r.rejected,
                }
                for r in self.annotators
            ],
            "omega": self.omega,
            "average_advantage": self.average_advantage,
            "epsilon": self.epsilon,
            "q": self.q,
            "passed": self.passed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True, indent=2) + "\n"


def consensus(annotations: list[MiniGraph]) -> MiniGraph:
    """Strict-majority vote over nodes (by identity key) and edges (by key triple).

    An item survives when it appears in more than half of the annotations.
    Surviving nodes carry the properties of the contribution with the most
    text, making the result independent of input order.
    """
    if len(annotations) < 2:
        raise ConfigError("consensus needs at least 2 annotations")
    majority = len(annotations) / 2.0

    node_votes: dict[str, int] = {}
    node_choice: dict[str, Node] = {}
    for annotation in annotations:
        seen: set[str] = set()
        for node in annotation.nodes:
            key = node_identity_key(node)
            if key in seen:
                continue
            seen.add(key)
            node_votes[key] = node_votes.get(key, 0) + 1
            current = node_choice.get(key)
            if current is None or _node_rank(node) > _node_rank(current):
                node_choice[key] = node

    surviving_keys = sorted(key for key, votes in node_votes.items() if votes > majority)
    nodes = []
    for key in surviving_keys:
        chosen = node_choice[key]
        provenance = frozenset()
        for annotation in annotations:
            for node in annotation.nodes:
                if node_identity_key(node) == key:
                    provenance |= node.provenance
        nodes.append(Node(id=key, kind=chosen.kind, properties=dict(chosen.properties), provenance=provenance))

    edge_votes: dict[tuple[str, str, EdgeKind], int] = {}
    edge_provenance: dict[tuple[str, str, EdgeKind], frozenset[str]] = {}
    for annotation in annotations:
        local = {node.id: node_identity_key(node) for node in annotation.nodes}
        seen_triples: set[tuple[str, str, EdgeKind]] = set()
        for edge in annotation.edges:
            triple = (local.get(edge.source, edge.source), local.get(edge.target, edge.target), edge.kind)
            if triple in seen_triples:
                continue
            seen_triples.add(triple)
            edge_votes[triple] = edge_votes.get(triple, 0) + 1
            edge_provenance[triple] = edge_provenance.get(triple, frozenset()) | edge.provenance
    edges = [
        Edge(source=source, target=target, kind=kind, provenance=edge_provenance[(source, target, kind)])
        for source, target, kind in sorted(
            (t for t, votes in edge_votes.items() if votes > majority),
            key=lambda t: (t[0], t[1], t[2].value),
        )
    ]
    return MiniGraph(nodes=nodes, edges=edges, source_clause=annotations[0].source_clause)


def _node_rank(node: Node) -> tuple[int, str]:
    bulk = sum(len(value) for value in node.properties.values())
    return (bulk, json.dumps(dict(sorted(node.properties.items()))))


def instance_distance(annotation: MiniGraph, reference: MiniGraph) -> float:
    """Disagreement in [0, 1]: one minus the fuzzy micro-F1 of the pair.

    Two empty graphs agree perfectly and get distance 0 even though the F1
    denominator vanishes there.
    """
    if not annotation.nodes and not annotation.edges and not reference.nodes and not reference.edges:
        return 0.0
    f1 = micro_prf(align_graphs(annotation, reference, mode="fuzzy"))[2]
    return 1.0 - f1


def _win_indicator(d_llm: float, d_human: float, epsilon: float) -> float:
    # Ties count as wins when there is no handicap; the half-win branch only
    # absorbs floating-point fuzz where d_llm lands a hair above d_human.
    if d_llm + epsilon <= d_human:
        return 1.0
    if epsilon == 0.0 and abs(d_llm - d_human) < TIE_TOLERANCE:
        return 0.5
    return 0.0


def _binomial_midp(win_total: float, n: int) -> float:
    """One-sided mid-p value for S wins out of n under Binomial(n, 1/2).

    p = P(X > S) + 0.5 * P(X = S); half-wins make S non-integral, in which
    case the point term vanishes.
    """
    scale = 0.5**n
    tail = sum(math.comb(n, k) for k in range(math.floor(win_total) + 1, n + 1)) * scale
    if float(win_total).is_integer():
        point = math.comb(n, int(win_total)) * scale
        return tail + 0.5 * point
    return tail


def benjamini_yekutieli(pvalues: list[float], q: float) -> list[bool]:
    """FDR control under arbitrary dependence: reject p_(k) <= k*q / (m*c(m)).

    c(m) is the m-th harmonic number. Returns per-hypothesis decisions in
    the original order.
    """
    if not 0.0 < q < 1.0:
        raise ConfigError("q must lie in (0, 1)")
    if not pvalues:
        return []
    if any(not 0.0 <= p <= 1.0 for p in pvalues):
        raise ConfigError("p-values must lie in [0, 1]")
    m = len(pvalues)
    c_m = sum(1.0 / i for i in range(1, m + 1))
    order = sorted(range(m), key=lambda i: (pvalues[i], i))
    k_star = 0
    for rank, index in enumerate(order, start=1):
        if pvalues[index] <= rank * q / (m * c_m):
            k_star = rank
    decisions = [False] * m
    for rank, index in enumerate(order, start=1):
        if rank <= k_star:
            decisions[index] = True
    return decisions


def alt_test(table: AnnotationTable, epsilon: float = 0.1, q: float = 0.05) -> AltTestReport:
    """Run the annotator-replacement test over a full annotation table.

    For annotator j and instance i, both the LLM and j are scored against
    the consensus of the other humans on i; the LLM wins when its distance
    plus the epsilon handicap does not exceed j's. Each annotator's win
    rate is tested one-sided against 0.5 (exact binomial, mid-p for
    half-wins) and decisions are BY-adjusted. omega is the rejected
    fraction; the overall test passes when omega >= 0.5.
    """
    if epsilon < 0:
        raise ConfigError("epsilon must be non-negative")
    if not 0.0 < q < 1.0:
        raise ConfigError("q must lie in (0, 1)")
    table.validate()

    annotators = sorted(table.humans)
    results: list[tuple[str, float, float]] = []
    for annotator in annotators:
        wins: list[float] = []
        for instance in table.instances:
            others = [
                table.humans[other][instance]
                for other in annotators
                if other != annotator
            ]
            reference = consensus(others)
            d_llm = instance_distance(table.llm[instance], reference)
            d_human = instance_distance(table.humans[annotator][instance], reference)
            wins.append(_win_indicator(d_llm, d_human, epsilon))
        rho = sum(wins) / len(wins)
        p_value = _binomial_midp(sum(wins), len(wins))
        results.append((annotator, rho, p_value))

    decisions = benjamini_yekutieli([p for _, _, p in results], q)
    annotator_results = [
        AnnotatorResult(annotator=a, advantage_probability=rho, p_value=p, rejected=rejected)
        for (a, rho, p), rejected in zip(results, decisions)
    ]
    omega = sum(decisions) / len(decisions)
    average = sum(rho for _, rho, _ in results) / len(results)
    return AltTestReport(
        annotators=annotator_results,
        omega=omega,
        average_advantage=average,
        epsilon=epsilon,
        q=q,
    )
