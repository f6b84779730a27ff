"""Reward scoring for graph extraction: structure credit, strict/fuzzy
micro-F1 alignment, semantic similarity, graph edit distance, the staged
gate schedule, and group-relative advantages.

All scoring functions are pure; only GateState evolves across a training
run, and it does so functionally (one run owns one state).
"""
from __future__ import annotations

import itertools
import json
import re
import statistics
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .errors import ConfigError, EmbedderError
from .ingest import MiniGraph, ParseOutcome, ParseQuality, parse_minigraph
from .ontology import (
    ENDPOINT_KINDS,
    STUB_INFERABLE_EDGE_KINDS,
    Edge,
    Node,
    node_discriminator,
    node_identity_key,
    stub_node_for_reference,
)

COMPONENTS = ("structure", "strict_f1", "fuzzy_f1", "semantic", "ged")
DEFAULT_STAGES: tuple[tuple[str, ...], ...] = (
    ("structure",),
    ("strict_f1", "fuzzy_f1"),
    ("semantic",),
    ("ged",),
)

# Search-effort ceiling for exact GED; a pathological dense pair degrades
# to the best bound found (flagged inexact) instead of stalling a trainer.
_GED_EXPANSION_CAP = 200_000

# Partial-credit ladder for generated JSON. Values are a design choice;
# only the ordering is contractual.
_STRUCTURE_LADDER = {
    ParseQuality.VALID_SCHEMA: 1.0,
    ParseQuality.REPAIRED: 0.5,
    ParseQuality.VALID_JSON_BAD_SCHEMA: 0.25,
    ParseQuality.INVALID: 0.0,
}


def structure_score(outcome: ParseOutcome) -> float:
    return _STRUCTURE_LADDER[outcome.classification]


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


def text_similarity(a: str, b: str) -> float:
    """Levenshtein similarity normalized by the longer string's length."""
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    return 1.0 - levenshtein(a, b) / max(len(a), len(b))


def resolve_for_scoring(graph: MiniGraph) -> MiniGraph:
    """Materialize dangling edge references as stub nodes, as assembly would.

    Scoring on the resolved form makes a prediction that leaves a
    cross-clause reference dangling score identically to one that creates
    the referenced node explicitly: assembly turns both into the same
    graph. A dangling reference first tries to attach to a local node with
    the same identity key; edges whose missing endpoint kind cannot be
    inferred are dropped, again mirroring assembly.
    """
    ids = {node.id for node in graph.nodes}
    id_by_key = {node_identity_key(node): node.id for node in graph.nodes}
    nodes = list(graph.nodes)
    edges: list[Edge] = []
    changed = False
    for edge in graph.edges:
        resolved: list[str] = []
        keep = True
        for position, ref in enumerate((edge.source, edge.target)):
            if ref in ids:
                resolved.append(ref)
                continue
            changed = True
            if edge.kind not in STUB_INFERABLE_EDGE_KINDS or not ref.strip():
                keep = False
                break
            kind = ENDPOINT_KINDS[edge.kind][position]
            stub = stub_node_for_reference(kind, ref, edge.provenance)
            key = node_identity_key(stub)
            if key not in id_by_key:
                node_id = stub.id
                while node_id in ids:
                    node_id = "~" + node_id
                nodes.append(Node(id=node_id, kind=stub.kind, properties=stub.properties, provenance=stub.provenance))
                ids.add(node_id)
                id_by_key[key] = node_id
            resolved.append(id_by_key[key])
        if keep:
            edges.append(Edge(source=resolved[0], target=resolved[1], kind=edge.kind, provenance=edge.provenance))
    if not changed:
        return graph
    return MiniGraph(nodes=nodes, edges=edges, source_clause=graph.source_clause)


@dataclass(frozen=True)
class Alignment:
    """One-to-one node and edge correspondence between a prediction and a gold graph."""

    node_pairs: list[tuple[str, str, float]]  # (pred node id, gold node id, similarity)
    edge_pairs: list[tuple[tuple[str, str, str], tuple[str, str, str]]]
    unmatched_pred: dict[str, int]
    unmatched_gold: dict[str, int]

    @property
    def true_positives(self) -> int:
        return len(self.node_pairs) + len(self.edge_pairs)


def align_graphs(
    pred: MiniGraph,
    gold: MiniGraph,
    mode: str = "strict",
    fuzzy_threshold: float = 0.8,
) -> Alignment:
    """Greedy one-to-one matching of nodes, then edges induced by the node map.

    Strict node matches require equal identity keys; fuzzy matches accept
    same-kind nodes whose discriminators reach the similarity threshold.
    Candidates are taken in similarity order with a (gold key, pred key)
    tie-break, which makes the result reproducible. Edges match when their
    kinds agree and both endpoints are matched to each other. Dangling
    references are stub-resolved on both sides first (see
    resolve_for_scoring), so every edge is node-backed.
    """
    if mode not in ("strict", "fuzzy"):
        raise ConfigError(f"unknown alignment mode: {mode!r}")
    pred = resolve_for_scoring(pred)
    gold = resolve_for_scoring(gold)

    gold_keys = [node_identity_key(node) for node in gold.nodes]
    pred_keys = [node_identity_key(node) for node in pred.nodes]
    gold_discs = [node_discriminator(node) for node in gold.nodes]
    pred_discs = [node_discriminator(node) for node in pred.nodes]

    candidates: list[tuple[float, str, str, int, int]] = []
    for gi, gnode in enumerate(gold.nodes):
        for pi, pnode in enumerate(pred.nodes):
            if gnode.kind is not pnode.kind:
                continue
            if gold_keys[gi] == pred_keys[pi]:
                similarity = 1.0
            elif mode == "fuzzy":
                similarity = text_similarity(gold_discs[gi], pred_discs[pi])
                if similarity < fuzzy_threshold:
                    continue
            else:
                continue
            candidates.append((-similarity, gold_keys[gi], pred_keys[pi], gi, pi))
    candidates.sort()

    gold_matched: dict[int, int] = {}
    pred_matched: dict[int, int] = {}
    node_pairs: list[tuple[str, str, float]] = []
    for neg_similarity, _, _, gi, pi in candidates:
        if gi in gold_matched or pi in pred_matched:
            continue
        gold_matched[gi] = pi
        pred_matched[pi] = gi
        node_pairs.append((pred.nodes[pi].id, gold.nodes[gi].id, -neg_similarity))

    pred_index = {node.id: i for i, node in enumerate(pred.nodes)}
    gold_ids = [node.id for node in gold.nodes]
    gold_edge_triples = {edge.triple() for edge in gold.edges}
    edge_pairs: list[tuple[tuple[str, str, str], tuple[str, str, str]]] = []
    for edge in pred.edges:
        si = pred_index.get(edge.source)
        ti = pred_index.get(edge.target)
        if si is None or ti is None or si not in pred_matched or ti not in pred_matched:
            continue
        gold_triple = (gold_ids[pred_matched[si]], gold_ids[pred_matched[ti]], edge.kind.value)
        if gold_triple in gold_edge_triples:
            edge_pairs.append((edge.triple(), gold_triple))

    return Alignment(
        node_pairs=node_pairs,
        edge_pairs=edge_pairs,
        unmatched_pred={
            "nodes": len(pred.nodes) - len(node_pairs),
            "edges": len(pred.edges) - len(edge_pairs),
        },
        unmatched_gold={
            "nodes": len(gold.nodes) - len(node_pairs),
            "edges": len(gold.edges) - len(edge_pairs),
        },
    )


def micro_prf(alignment: Alignment) -> tuple[float, float, float]:
    """(precision, recall, F1) with zero denominators yielding 0."""
    tp = alignment.true_positives
    fp = alignment.unmatched_pred["nodes"] + alignment.unmatched_pred["edges"]
    fn = alignment.unmatched_gold["nodes"] + alignment.unmatched_gold["edges"]
    return _prf(tp, fp, fn)


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


_TOKEN = re.compile(r"[a-z0-9]+")

Embedder = Callable[[str], "Mapping[str, float] | Sequence[float]"]


def term_frequency_embedding(text: str) -> dict[str, float]:
    """L2-normalized term frequencies over lowercased word tokens.

    Deterministic and dependency-free; the default stand-in for an external
    embedding model behind the same interface.
    """
    counts = Counter(_TOKEN.findall(text.lower()))
    norm = sum(c * c for c in counts.values()) ** 0.5
    if not norm:
        return {}
    return {token: count / norm for token, count in counts.items()}


def _cosine(u: Mapping[str, float] | Sequence[float], v: Mapping[str, float] | Sequence[float]) -> float:
    if isinstance(u, Mapping) and isinstance(v, Mapping):
        dot = sum(value * v.get(token, 0.0) for token, value in u.items())
        nu = sum(value * value for value in u.values()) ** 0.5
        nv = sum(value * value for value in v.values()) ** 0.5
    else:
        dot = sum(a * b for a, b in zip(u, v))
        nu = sum(a * a for a in u) ** 0.5
        nv = sum(b * b for b in v) ** 0.5
    if not nu or not nv:
        return 0.0
    return dot / (nu * nv)


def semantic_similarity(
    pred: MiniGraph,
    gold: MiniGraph,
    embedder: Embedder = term_frequency_embedding,
) -> float:
    """Mean best-candidate cosine between gold and pred node texts, mapped to [0, 1].

    Each gold node is compared against same-kind pred nodes; a gold node
    with no candidate contributes cosine 0. The mean over gold nodes is
    mapped from [-1, 1] to [0, 1].
    """

    def embed(node: Node) -> Mapping[str, float] | Sequence[float]:
        text = node_discriminator(node)
        try:
            return embedder(text)
        except Exception as exc:  # noqa: BLE001 - propagate with provenance
            clauses = ",".join(sorted(node.provenance)) or "unknown"
            raise EmbedderError(f"embedder failed on {text!r} (clauses: {clauses}): {exc}") from exc

    if not gold.nodes:
        return 1.0 if not pred.nodes else 0.5

    pred_vectors: dict[int, Mapping[str, float] | Sequence[float]] = {}
    total = 0.0
    for gnode in gold.nodes:
        gvec = embed(gnode)
        best = 0.0
        seen_candidate = False
        for pi, pnode in enumerate(pred.nodes):
            if pnode.kind is not gnode.kind:
                continue
            if pi not in pred_vectors:
                pred_vectors[pi] = embed(pnode)
            seen_candidate = True
            best = max(best, _cosine(gvec, pred_vectors[pi]))
        total += best if seen_candidate else 0.0
    mean = total / len(gold.nodes)
    return (mean + 1.0) / 2.0


@dataclass(frozen=True)
class GedResult:
    value: float
    exact: bool


def _local_edges(graph: MiniGraph) -> tuple[list[tuple[int, int, str]], int]:
    """Edges as index triples, plus the count of edges with dangling endpoints."""
    index = {node.id: i for i, node in enumerate(graph.nodes)}
    local: list[tuple[int, int, str]] = []
    loose = 0
    for edge in graph.edges:
        si = index.get(edge.source)
        ti = index.get(edge.target)
        if si is None or ti is None:
            loose += 1
        else:
            local.append((si, ti, edge.kind.value))
    return local, loose


def _alignment_bound(g1: MiniGraph, g2: MiniGraph) -> int:
    """Upper bound on GED from the strict alignment: unmatched items cost 1 each."""
    alignment = align_graphs(g1, g2, mode="strict")
    matched_nodes = len(alignment.node_pairs)
    matched_edges = len(alignment.edge_pairs)
    return (
        len(g1.nodes)
        + len(g2.nodes)
        - 2 * matched_nodes
        + len(g1.edges)
        + len(g2.edges)
        - 2 * matched_edges
    )


def graph_edit_distance(g1: MiniGraph, g2: MiniGraph, node_budget: int = 12) -> GedResult:
    """Unit-cost graph edit distance between two minigraphs.

    Node insert/delete/relabel and edge insert/delete all cost 1; mapping a
    node onto one with an equal identity key costs 0. Dangling references
    are stub-resolved first so every edge can participate structurally.
    Runs an exact branch-and-bound search when both graphs fit the node
    budget, otherwise returns the strict-alignment upper bound flagged as
    inexact.
    """
    g1 = resolve_for_scoring(g1)
    g2 = resolve_for_scoring(g2)
    n1, n2 = len(g1.nodes), len(g2.nodes)
    upper = _alignment_bound(g1, g2)
    if max(n1, n2) > node_budget:
        return GedResult(value=float(upper), exact=False)

    keys2 = [node_identity_key(node) for node in g2.nodes]
    edges1_raw, loose1 = _local_edges(g1)
    edges2, loose2 = _local_edges(g2)
    e1_total = len(edges1_raw) + loose1
    e2_total = len(edges2) + loose2
    e2_set = frozenset(edges2)

    # Assign high-degree nodes first so edge constraints prune early.
    degree1 = [0] * n1
    for si, ti, _ in edges1_raw:
        degree1[si] += 1
        degree1[ti] += 1
    order = sorted(range(n1), key=lambda i: (-degree1[i], i))
    position = {original: rank for rank, original in enumerate(order)}
    keys1 = [node_identity_key(g1.nodes[original]) for original in order]
    edges1 = [(position[si], position[ti], kind) for si, ti, kind in edges1_raw]

    # Local edges grouped by their later endpoint, so preservation is
    # settled exactly when that endpoint gets assigned.
    edges_by_later: list[list[tuple[int, int, str]]] = [[] for _ in range(n1)]
    decided_prefix = [0] * (n1 + 1)
    for si, ti, kind in edges1:
        edges_by_later[max(si, ti)].append((si, ti, kind))
    for i in range(n1):
        decided_prefix[i + 1] = decided_prefix[i] + len(edges_by_later[i])

    suffix_keys: list[Counter] = [Counter() for _ in range(n1 + 1)]
    for i in range(n1 - 1, -1, -1):
        suffix_keys[i] = suffix_keys[i + 1].copy()
        suffix_keys[i][keys1[i]] += 1
    remaining2 = Counter(keys2)

    # E2 edges buried with both endpoints already assigned can no longer be
    # preserved by future decisions; tracking them tightens the edge bound.
    e2_incident: list[list[int]] = [[] for _ in range(n2)]
    for index, (si, ti, _) in enumerate(edges2):
        e2_incident[si].append(index)
        if ti != si:
            e2_incident[ti].append(index)

    assignment: list[int | None] = [None] * n1
    used2: set[int] = set()
    buried = 0
    best = upper
    expansions = 0
    capped = False

    def lower_bound(i: int, node_cost: int, preserved: int) -> int:
        r1 = n1 - i
        r2 = n2 - len(used2)
        overlap = sum(min(count, remaining2[key]) for key, count in suffix_keys[i].items())
        lb_nodes = max(r1, r2) - overlap
        undecided = len(edges1) - decided_prefix[i]
        attainable = preserved + min(undecided, len(edges2) - buried)
        lb_edges = e1_total + e2_total - 2 * attainable
        return node_cost + lb_nodes + lb_edges

    def preserved_delta(i: int, j: int) -> int:
        delta = 0
        for si, ti, kind in edges_by_later[i]:
            ms = j if si == i else assignment[si]
            mt = j if ti == i else assignment[ti]
            if ms is not None and mt is not None and (ms, mt, kind) in e2_set:
                delta += 1
        return delta

    def buried_delta(j: int) -> int:
        count = 0
        for index in e2_incident[j]:
            si, ti, _ = edges2[index]
            other = ti if si == j else si
            if other == j or other in used2:
                count += 1
        return count

    def search(i: int, node_cost: int, preserved: int) -> None:
        nonlocal best, buried, expansions, capped
        expansions += 1
        if expansions > _GED_EXPANSION_CAP:
            capped = True
            return
        if lower_bound(i, node_cost, preserved) >= best:
            return
        if i == n1:
            total = node_cost + (n2 - len(used2)) + e1_total + e2_total - 2 * preserved
            best = min(best, total)
            return
        options = sorted(
            (0 if keys2[j] == keys1[i] else 1, j)
            for j in range(n2)
            if j not in used2
        )
        for substitution_cost, j in options:
            delta_buried = buried_delta(j)
            assignment[i] = j
            used2.add(j)
            remaining2[keys2[j]] -= 1
            buried += delta_buried
            search(i + 1, node_cost + substitution_cost, preserved + preserved_delta(i, j))
            buried -= delta_buried
            remaining2[keys2[j]] += 1
            used2.discard(j)
            assignment[i] = None
            if capped:
                return
        # Deleting the node: every local edge at i becomes unpreservable.
        search(i + 1, node_cost + 1, preserved)

    search(0, 0, 0)
    return GedResult(value=float(best), exact=not capped)


def ged_score(pred: MiniGraph, gold: MiniGraph, node_budget: int = 12) -> tuple[float, bool]:
    """GED normalized to a [0, 1] reward: 1 - GED / total item count."""
    pred = resolve_for_scoring(pred)
    gold = resolve_for_scoring(gold)
    size = len(pred.nodes) + len(pred.edges) + len(gold.nodes) + len(gold.edges)
    if size == 0:
        return 1.0, True
    result = graph_edit_distance(pred, gold, node_budget)
    return max(0.0, min(1.0, 1.0 - result.value / size)), result.exact


def _default_weights() -> dict[str, float]:
    return {component: 1.0 for component in COMPONENTS}


@dataclass(frozen=True)
class RewardConfig:
    weights: dict[str, float] = field(default_factory=_default_weights)
    fuzzy_threshold: float = 0.8
    window: int = 50
    advance_threshold: float = 0.7
    node_budget: int = 12
    max_steps_per_stage: int | None = None
    stages: tuple[tuple[str, ...], ...] = DEFAULT_STAGES

    def __post_init__(self) -> None:
        unknown = set(self.weights) - set(COMPONENTS)
        if unknown:
            raise ConfigError(f"unknown reward components in weights: {sorted(unknown)}")
        if any(value < 0 for value in self.weights.values()):
            raise ConfigError("weights must be non-negative")
        merged = _default_weights()
        merged.update(self.weights)
        object.__setattr__(self, "weights", merged)
        if self.window < 1:
            raise ConfigError("window must be at least 1")
        if not 0.0 <= self.advance_threshold <= 1.0:
            raise ConfigError("advance_threshold must lie in [0, 1]")
        if not 0.0 <= self.fuzzy_threshold <= 1.0:
            raise ConfigError("fuzzy_threshold must lie in [0, 1]")
        if self.node_budget < 0:
            raise ConfigError("node_budget must be non-negative")
        if self.max_steps_per_stage is not None and self.max_steps_per_stage < 1:
            raise ConfigError("max_steps_per_stage must be positive")
        if not self.stages:
            raise ConfigError("at least one reward stage is required")
        seen: set[str] = set()
        for stage in self.stages:
            if not stage:
                raise ConfigError("stages must not be empty")
            for component in stage:
                if component not in COMPONENTS:
                    raise ConfigError(f"unknown component in stages: {component!r}")
                if component in seen:
                    raise ConfigError(f"component listed in two stages: {component!r}")
                seen.add(component)

    @classmethod
    def from_obj(cls, obj: dict) -> "RewardConfig":
        if not isinstance(obj, dict):
            raise ConfigError("reward config must be a JSON object")
        known = {
            "weights",
            "fuzzy_threshold",
            "window",
            "advance_threshold",
            "node_budget",
            "max_steps_per_stage",
            "stages",
        }
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown reward config keys: {sorted(unknown)}")
        kwargs: dict = {}
        try:
            if "weights" in obj:
                weights = obj["weights"]
                if not isinstance(weights, dict):
                    raise ConfigError("weights must be an object")
                kwargs["weights"] = {str(k): float(v) for k, v in weights.items()}
            for key in ("fuzzy_threshold", "advance_threshold"):
                if key in obj:
                    kwargs[key] = float(obj[key])
            for key in ("window", "node_budget"):
                if key in obj:
                    kwargs[key] = int(obj[key])
            if obj.get("max_steps_per_stage") is not None:
                kwargs["max_steps_per_stage"] = int(obj["max_steps_per_stage"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"reward config values must be numeric: {exc}") from exc
        if "stages" in obj:
            stages = obj["stages"]
            if not isinstance(stages, list) or not all(isinstance(s, list) for s in stages):
                raise ConfigError("stages must be an array of component arrays")
            kwargs["stages"] = tuple(tuple(str(c) for c in stage) for stage in stages)
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str | bytes) -> "RewardConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed reward config JSON: {exc.msg}") from exc
        return cls.from_obj(obj)


@dataclass(frozen=True)
class GateState:
    """Which reward stages are open and how close the newest one is to advancing.

    The stage index never decreases and gates never close. The trailing
    window tracks the newest stage's mean component score; crossing the
    advance threshold (or exhausting max_steps_per_stage) opens the next
    stage starting from the following step.
    """

    config: RewardConfig = field(default_factory=RewardConfig)
    stage: int = 0
    window_scores: tuple[float, ...] = ()
    steps_in_stage: int = 0

    def open_components(self) -> tuple[str, ...]:
        return tuple(
            itertools.chain.from_iterable(self.config.stages[: self.stage + 1])
        )

    def window_mean(self) -> float:
        if not self.window_scores:
            return 0.0
        return sum(self.window_scores) / len(self.window_scores)

    def summary(self) -> dict:
        return {
            "stage": self.stage,
            "open_components": list(self.open_components()),
            "steps_in_stage": self.steps_in_stage,
            "window_mean": self.window_mean(),
        }


@dataclass(frozen=True)
class RewardBreakdown:
    structure: float
    strict_f1: float
    fuzzy_f1: float
    semantic: float
    ged_score: float
    total: float
    weights: dict[str, float]
    open_components: tuple[str, ...]

    def to_obj(self) -> dict:
        return {
            "structure": self.structure,
            "strict_f1": self.strict_f1,
            "fuzzy_f1": self.fuzzy_f1,
            "semantic": self.semantic,
            "ged_score": self.ged_score,
            "total": self.total,
            "weights": dict(sorted(self.weights.items())),
            "open_components": list(self.open_components),
        }


def gated_reward_step(scores: Mapping[str, float], state: GateState) -> tuple[RewardBreakdown, GateState]:
    """Combine component scores under the currently open gates and advance the state.

    The total sums weighted scores of open components only; closed
    components are still recorded in the breakdown. Gate advancement takes
    effect on the next call.
    """
    missing = [component for component in COMPONENTS if component not in scores]
    if missing:
        raise ConfigError(f"missing component scores: {missing}")
    config = state.config
    open_components = state.open_components()
    total = sum(config.weights[c] * scores[c] for c in open_components)
    breakdown = RewardBreakdown(
        structure=scores["structure"],
        strict_f1=scores["strict_f1"],
        fuzzy_f1=scores["fuzzy_f1"],
        semantic=scores["semantic"],
        ged_score=scores["ged"],
        total=total,
        weights=dict(config.weights),
        open_components=open_components,
    )

    newest = config.stages[state.stage]
    stage_mean = sum(scores[c] for c in newest) / len(newest)
    window = (state.window_scores + (stage_mean,))[-config.window :]
    steps = state.steps_in_stage + 1
    at_last_stage = state.stage >= len(config.stages) - 1
    hit_threshold = sum(window) / len(window) >= config.advance_threshold
    hit_step_cap = config.max_steps_per_stage is not None and steps >= config.max_steps_per_stage
    if not at_last_stage and (hit_threshold or hit_step_cap):
        new_state = GateState(config=config, stage=state.stage + 1)
    else:
        new_state = GateState(config=config, stage=state.stage, window_scores=window, steps_in_stage=steps)
    return breakdown, new_state


def score_prediction(
    gold: MiniGraph,
    prediction_text: str,
    config: RewardConfig | None = None,
) -> tuple[dict[str, float], ParseOutcome]:
    """Compute all component scores for one candidate against its gold graph."""
    config = config or RewardConfig()
    outcome = parse_minigraph(prediction_text, gold.source_clause)
    scores = {component: 0.0 for component in COMPONENTS}
    scores["structure"] = structure_score(outcome)
    if outcome.minigraph is not None:
        pred = outcome.minigraph
        scores["strict_f1"] = micro_prf(align_graphs(pred, gold, "strict"))[2]
        scores["fuzzy_f1"] = micro_prf(
            align_graphs(pred, gold, "fuzzy", config.fuzzy_threshold)
        )[2]
        scores["semantic"] = semantic_similarity(pred, gold)
        scores["ged"], _ = ged_score(pred, gold, config.node_budget)
    return scores, outcome


def group_advantages(rewards: Sequence[float]) -> list[float]:
    """Standardized scores within one prompt's generation group.

    Uses the population standard deviation; a zero-variance group yields
    all-zero advantages.
    """
    if len(rewards) < 2:
        raise ConfigError("group_advantages needs at least 2 rewards")
    mean = statistics.fmean(rewards)
    std = statistics.pstdev(rewards)
    if std == 0.0:
        return [0.0] * len(rewards)
    return [(r - mean) / std for r in rewards]


@dataclass(frozen=True)
class EvalReport:
    strict_micro_precision: float
    strict_micro_recall: float
    strict_micro_f1: float
    fuzzy_micro_precision: float
    fuzzy_micro_recall: float
    fuzzy_micro_f1: float
    invalid_json_rate: float

    def to_obj(self) -> dict:
        return {
            "strict_micro_precision": self.strict_micro_precision,
            "strict_micro_recall": self.strict_micro_recall,
            "strict_micro_f1": self.strict_micro_f1,
            "fuzzy_micro_precision": self.fuzzy_micro_precision,
            "fuzzy_micro_recall": self.fuzzy_micro_recall,
            "fuzzy_micro_f1": self.fuzzy_micro_f1,
            "invalid_json_rate": self.invalid_json_rate,
        }


def evaluate_dataset(
    pairs: Sequence[tuple[str, MiniGraph]],
    config: RewardConfig | None = None,
) -> EvalReport:
    """Aggregate micro metrics over (raw prediction, gold) pairs.

    TP/FP/FN counts accumulate across the whole dataset before computing
    precision/recall/F1. ``invalid_json_rate`` counts predictions that
    produced no usable graph (invalid or valid-JSON-but-wrong-schema).
    """
    config = config or RewardConfig()
    strict = [0, 0, 0]  # tp, fp, fn
    fuzzy = [0, 0, 0]
    invalid = 0
    for text, gold in pairs:
        outcome = parse_minigraph(text, gold.source_clause)
        gold_items = len(gold.nodes) + len(gold.edges)
        if outcome.minigraph is None:
            invalid += 1
            strict[2] += gold_items
            fuzzy[2] += gold_items
            continue
        for counts, mode in ((strict, "strict"), (fuzzy, "fuzzy")):
            alignment = align_graphs(outcome.minigraph, gold, mode, config.fuzzy_threshold)
            counts[0] += alignment.true_positives
            counts[1] += alignment.unmatched_pred["nodes"] + alignment.unmatched_pred["edges"]
            counts[2] += alignment.unmatched_gold["nodes"] + alignment.unmatched_gold["edges"]
    strict_prf = _prf(*strict)
    fuzzy_prf = _prf(*fuzzy)
    return EvalReport(
        strict_micro_precision=strict_prf[0],
        strict_micro_recall=strict_prf[1],
        strict_micro_f1=strict_prf[2],
        fuzzy_micro_precision=fuzzy_prf[0],
        fuzzy_micro_recall=fuzzy_prf[1],
        fuzzy_micro_f1=fuzzy_prf[2],
        invalid_json_rate=invalid / len(pairs) if pairs else 0.0,
    )
