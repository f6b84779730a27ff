"""Contract-graph metrics and findings: density, depth, degrees, cores,
cut vertices, definition coverage, path finding, and cycle detection.

Every metric is a pure function of an immutable ContractGraph and iterates
sorted structures, so identical graphs produce byte-identical reports
regardless of node insertion order.
"""
from __future__ import annotations

import heapq
import json
from collections import deque
from dataclasses import dataclass, field

from .assemble import ContractGraph
from .errors import ConfigError, SchemaError
from .ontology import EdgeKind, NodeKind

DEPTH_EDGE_KINDS = frozenset({EdgeKind.IS_PART_OF, EdgeKind.REFERENCES})

_SEVERITY_RANK = {"error": 0, "warning": 1, "info": 2}


@dataclass(frozen=True)
class Finding:
    severity: str
    rule: str
    message: str


@dataclass(frozen=True)
class LintThresholds:
    max_density: float | None = None
    min_density: float | None = None
    max_depth: int | None = None
    max_orphan_ratio: float | None = None
    max_leaf_ratio: float | None = None
    k_core_report: int | None = None

    def __post_init__(self) -> None:
        if (
            self.min_density is not None
            and self.max_density is not None
            and self.min_density > self.max_density
        ):
            raise ConfigError("min_density must not exceed max_density")

    @classmethod
    def from_obj(cls, obj: dict) -> "LintThresholds":
        if not isinstance(obj, dict):
            raise ConfigError("thresholds must be a JSON object")
        known = {
            "max_density",
            "min_density",
            "max_depth",
            "max_orphan_ratio",
            "max_leaf_ratio",
            "k_core_report",
        }
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown threshold keys: {sorted(unknown)}")
        values = {}
        for key in known:
            value = obj.get(key)
            if value is None:
                continue
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"threshold {key} must be numeric")
            values[key] = int(value) if key in ("max_depth", "k_core_report") else float(value)
        return cls(**values)


@dataclass
class DegreeProfile:
    degrees: dict[str, tuple[int, int, int]]
    orphan_count: int
    leaf_count: int
    orphan_ratio: float
    leaf_ratio: float


@dataclass
class DefinitionCoverage:
    unused_terms: list[str]
    undefined_used: list[str]


@dataclass
class LintReport:
    node_count: int
    edge_count: int
    density: float
    dependency_depth: int
    dependency_path: list[str]
    depth_unit: str
    orphan_count: int
    leaf_count: int
    orphan_ratio: float
    leaf_ratio: float
    degree_table: dict[str, tuple[int, int, int]]
    core_numbers: dict[str, int]
    articulation_points: list[str]
    definition_coverage: DefinitionCoverage
    cycles: list[list[str]]
    findings: list[Finding]
    notes: list[str] = field(default_factory=list)

    def to_obj(self) -> dict:
        return {
            "node_count": self.node_count,
            "edge_count": self.edge_count,
            "density": self.density,
            "dependency_depth": self.dependency_depth,
            "dependency_path": self.dependency_path,
            "depth_unit": self.depth_unit,
            "orphan_count": self.orphan_count,
            "leaf_count": self.leaf_count,
            "orphan_ratio": self.orphan_ratio,
            "leaf_ratio": self.leaf_ratio,
            "degree_table": {
                key: {"in": d_in, "out": d_out, "total": d_total}
                for key, (d_in, d_out, d_total) in sorted(self.degree_table.items())
            },
            "core_numbers": dict(sorted(self.core_numbers.items())),
            "articulation_points": self.articulation_points,
            "definition_coverage": {
                "unused_terms": self.definition_coverage.unused_terms,
                "undefined_used": self.definition_coverage.undefined_used,
            },
            "cycles": self.cycles,
            "findings": [
                {"severity": f.severity, "rule": f.rule, "message": f.message}
                for f in self.findings
            ],
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True, indent=2) + "\n"


def exit_code(report: LintReport) -> int:
    """0 = nothing at warning level or above, 1 = warnings, 2 = errors."""
    worst = min(
        (_SEVERITY_RANK[f.severity] for f in report.findings),
        default=3,
    )
    if worst == 0:
        return 2
    if worst == 1:
        return 1
    return 0


def density_from_counts(node_count: int, edge_count: int) -> float:
    """Directed density m / (n * (n - 1)); 0 for degenerate graphs.

    m counts every kind-labelled edge, matching how contract graphs report
    their edge totals.
    """
    if node_count <= 1:
        return 0.0
    return edge_count / (node_count * (node_count - 1))


def density(graph: ContractGraph) -> float:
    return density_from_counts(graph.node_count, graph.edge_count)


def _undirected_neighbors(graph: ContractGraph) -> dict[str, tuple[str, ...]]:
    neighbors: dict[str, set[str]] = {key: set() for key in graph.nodes}
    for edge in graph.edges.values():
        if edge.source != edge.target:
            neighbors[edge.source].add(edge.target)
            neighbors[edge.target].add(edge.source)
    return {key: tuple(sorted(peers)) for key, peers in neighbors.items()}


def _directed_successors(
    graph: ContractGraph,
    kinds: frozenset[EdgeKind] | None = None,
    include_self_loops: bool = True,
) -> dict[str, tuple[str, ...]]:
    successors: dict[str, set[str]] = {key: set() for key in graph.nodes}
    for edge in graph.edges.values():
        if kinds is not None and edge.kind not in kinds:
            continue
        if not include_self_loops and edge.source == edge.target:
            continue
        successors[edge.source].add(edge.target)
    return {key: tuple(sorted(peers)) for key, peers in successors.items()}


def _strongly_connected_components(successors: dict[str, tuple[str, ...]]) -> list[list[str]]:
    """Tarjan's algorithm, iterative. Components come out sinks-first."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    components: list[list[str]] = []
    counter = 0

    for root in sorted(successors):
        if root in index:
            continue
        work: list[tuple[str, int]] = [(root, 0)]
        while work:
            node, child_index = work.pop()
            if child_index == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            descended = False
            children = successors[node]
            while child_index < len(children):
                child = children[child_index]
                child_index += 1
                if child not in index:
                    work.append((node, child_index))
                    work.append((child, 0))
                    descended = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if descended:
                continue
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                components.append(sorted(component))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return components


def dependency_depth(graph: ContractGraph) -> tuple[int, list[str]]:
    """Longest hierarchy/reference chain, measured in edges.

    Only IS_PART_OF and REFERENCES edges participate. Cycles are reported
    separately, so strongly connected components are contracted first and
    the longest path is taken on the condensation; the witness runs through
    each component's lexicographically smallest member.
    """
    if not graph.nodes:
        return 0, []
    successors = _directed_successors(graph, kinds=DEPTH_EDGE_KINDS)
    components = _strongly_connected_components(successors)
    component_of = {node: i for i, comp in enumerate(components) for node in comp}
    representative = [comp[0] for comp in components]

    condensed: list[set[int]] = [set() for _ in components]
    for node, peers in successors.items():
        cu = component_of[node]
        for peer in peers:
            cv = component_of[peer]
            if cu != cv:
                condensed[cu].add(cv)

    # Tarjan emits components sinks-first; reversing gives topological order.
    order = list(reversed(range(len(components))))
    dist = [0] * len(components)
    prev: list[int | None] = [None] * len(components)
    for cu in order:
        for cv in sorted(condensed[cu], key=lambda c: representative[c]):
            candidate = dist[cu] + 1
            if candidate > dist[cv] or (
                candidate == dist[cv]
                and prev[cv] is not None
                and representative[cu] < representative[prev[cv]]
            ):
                dist[cv] = candidate
                prev[cv] = cu

    end = min(
        range(len(components)),
        key=lambda c: (-dist[c], representative[c]),
    )
    path: list[int] = []
    cursor: int | None = end
    while cursor is not None:
        path.append(cursor)
        cursor = prev[cursor]
    path.reverse()
    return dist[end], [representative[c] for c in path]


def degree_profile(graph: ContractGraph) -> DegreeProfile:
    """Per-node in/out/total degrees with orphan (in=0) and leaf (out=0) ratios."""
    degrees: dict[str, tuple[int, int, int]] = {}
    orphan_count = 0
    leaf_count = 0
    for key in graph.node_keys():
        d_in = len(graph.incoming(key))
        d_out = len(graph.outgoing(key))
        degrees[key] = (d_in, d_out, d_in + d_out)
        if d_in == 0:
            orphan_count += 1
        if d_out == 0:
            leaf_count += 1
    n = graph.node_count
    return DegreeProfile(
        degrees=degrees,
        orphan_count=orphan_count,
        leaf_count=leaf_count,
        orphan_ratio=orphan_count / n if n else 0.0,
        leaf_ratio=leaf_count / n if n else 0.0,
    )


def k_core(graph: ContractGraph) -> dict[str, int]:
    """Core number of each node on the undirected simple view.

    Standard peeling: repeatedly remove the minimum-degree node; a node's
    core number is the largest degree bound seen up to its removal.
    """
    neighbors = _undirected_neighbors(graph)
    degree = {node: len(peers) for node, peers in neighbors.items()}
    heap = [(d, node) for node, d in sorted(degree.items())]
    heapq.heapify(heap)
    core: dict[str, int] = {}
    removed: set[str] = set()
    current = 0
    while heap:
        d, node = heapq.heappop(heap)
        if node in removed or d != degree[node]:
            continue
        removed.add(node)
        current = max(current, d)
        core[node] = current
        for peer in neighbors[node]:
            if peer not in removed:
                degree[peer] -= 1
                heapq.heappush(heap, (degree[peer], peer))
    return core


def max_core_members(core_numbers: dict[str, int]) -> tuple[int, list[str]]:
    """The densest core's k and its sorted member list (the minimum viable read)."""
    if not core_numbers:
        return 0, []
    top = max(core_numbers.values())
    return top, sorted(key for key, k in core_numbers.items() if k == top)


def articulation_points(graph: ContractGraph) -> list[str]:
    """Cut vertices of the undirected view, per connected component, sorted."""
    neighbors = _undirected_neighbors(graph)
    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    cut: set[str] = set()
    time = 0

    for root in sorted(neighbors):
        if root in disc:
            continue
        disc[root] = low[root] = time
        time += 1
        root_children = 0
        stack: list[tuple[str, str | None, int]] = [(root, None, 0)]
        while stack:
            node, parent, child_index = stack.pop()
            peers = neighbors[node]
            descended = False
            while child_index < len(peers):
                child = peers[child_index]
                child_index += 1
                if child == parent:
                    continue
                if child not in disc:
                    disc[child] = low[child] = time
                    time += 1
                    if node == root:
                        root_children += 1
                    stack.append((node, parent, child_index))
                    stack.append((child, node, 0))
                    descended = True
                    break
                low[node] = min(low[node], disc[child])
            if descended:
                continue
            if stack:
                up_node = stack[-1][0]
                low[up_node] = min(low[up_node], low[node])
                if up_node != root and low[node] >= disc[up_node]:
                    cut.add(up_node)
        if root_children >= 2:
            cut.add(root)
    return sorted(cut)


def definition_coverage(graph: ContractGraph) -> DefinitionCoverage:
    """Audit the internal lexicon: defined-but-unused and used-but-undefined terms."""
    unused: list[str] = []
    undefined: list[str] = []
    for key in graph.node_keys():
        if graph.nodes[key].kind is not NodeKind.DEFINED_TERM:
            continue
        incoming_kinds = {edge.kind for edge in graph.incoming(key)}
        defined = EdgeKind.DEFINES in incoming_kinds
        used = EdgeKind.USES in incoming_kinds
        if defined and not used:
            unused.append(key)
        elif used and not defined:
            undefined.append(key)
    return DefinitionCoverage(unused_terms=unused, undefined_used=undefined)


def find_paths(
    graph: ContractGraph,
    src: str,
    dst: str,
    max_paths: int = 10,
    max_len: int = 12,
) -> list[list[str]]:
    """Up to max_paths simple directed paths from src to dst, shortest first.

    Paths of equal length come out in lexicographic key order. The caps
    keep enumeration bounded on dense graphs.
    """
    for key in (src, dst):
        if key not in graph.nodes:
            raise SchemaError(f"unknown node key: {key!r}")
    successors = _directed_successors(graph)
    results: list[list[str]] = []
    heap: list[tuple[int, tuple[str, ...]]] = [(0, (src,))]
    while heap and len(results) < max_paths:
        length, path = heapq.heappop(heap)
        node = path[-1]
        if node == dst:
            results.append(list(path))
            continue
        if length >= max_len:
            continue
        for peer in successors[node]:
            if peer not in path:
                heapq.heappush(heap, (length + 1, path + (peer,)))
    return results


def detect_cycles(graph: ContractGraph) -> list[list[str]]:
    """One representative cycle per non-trivial strongly connected component,
    plus every self-loop. Each representative runs through the component's
    lexicographically smallest node; cycles list each node once.
    """
    successors = _directed_successors(graph, include_self_loops=False)
    cycles: list[list[str]] = []
    for key in sorted(graph.nodes):
        if any(edge.target == key for edge in graph.outgoing(key)):
            cycles.append([key])
    for component in _strongly_connected_components(successors):
        if len(component) < 2:
            continue
        members = set(component)
        start = component[0]
        parent: dict[str, str] = {}
        seen = {start}
        queue: deque[str] = deque([start])
        closer: str | None = None
        while queue and closer is None:
            node = queue.popleft()
            for peer in successors[node]:
                if peer not in members:
                    continue
                if peer == start:
                    closer = node
                    break
                if peer not in seen:
                    seen.add(peer)
                    parent[peer] = node
                    queue.append(peer)
        assert closer is not None  # every node in a non-trivial SCC lies on a cycle
        tail = []
        cursor = closer
        while cursor != start:
            tail.append(cursor)
            cursor = parent[cursor]
        cycles.append([start] + list(reversed(tail)))
    return sorted(cycles)


def _threshold_findings(
    thresholds: LintThresholds,
    density_value: float,
    depth: int,
    profile: DegreeProfile,
    core_numbers: dict[str, int],
) -> list[Finding]:
    findings = []
    if thresholds.max_density is not None and density_value > thresholds.max_density:
        findings.append(
            Finding("warning", "max-density", f"density {density_value:.4f} exceeds {thresholds.max_density}")
        )
    if thresholds.min_density is not None and density_value < thresholds.min_density:
        findings.append(
            Finding("warning", "min-density", f"density {density_value:.4f} below {thresholds.min_density}")
        )
    if thresholds.max_depth is not None and depth > thresholds.max_depth:
        findings.append(
            Finding("warning", "max-depth", f"dependency depth {depth} exceeds {thresholds.max_depth}")
        )
    if thresholds.max_orphan_ratio is not None and profile.orphan_ratio > thresholds.max_orphan_ratio:
        findings.append(
            Finding(
                "warning",
                "max-orphan-ratio",
                f"orphan ratio {profile.orphan_ratio:.4f} exceeds {thresholds.max_orphan_ratio}",
            )
        )
    if thresholds.max_leaf_ratio is not None and profile.leaf_ratio > thresholds.max_leaf_ratio:
        findings.append(
            Finding(
                "warning",
                "max-leaf-ratio",
                f"leaf ratio {profile.leaf_ratio:.4f} exceeds {thresholds.max_leaf_ratio}",
            )
        )
    if thresholds.k_core_report is not None:
        top, members = max_core_members(core_numbers)
        if top >= thresholds.k_core_report:
            findings.append(
                Finding(
                    "info",
                    "k-core",
                    f"{top}-core of {len(members)} nodes forms the minimum viable read",
                )
            )
    return findings


def lint_report(graph: ContractGraph, thresholds: LintThresholds | None = None) -> LintReport:
    """Run the full metric suite and collect threshold/structure findings."""
    thresholds = thresholds or LintThresholds()
    notes: list[str] = []
    if graph.node_count <= 1:
        notes.append("degenerate graph: density is defined as 0 for fewer than 2 nodes")
    if graph.node_count == 0:
        notes.append("empty graph: ratios reported as 0")
    density_value = density(graph)
    depth, witness = dependency_depth(graph)
    profile = degree_profile(graph)
    core_numbers = k_core(graph)
    cut_vertices = articulation_points(graph)
    coverage = definition_coverage(graph)
    cycles = detect_cycles(graph)

    findings: list[Finding] = []
    for cycle in cycles:
        loop = " -> ".join(cycle + [cycle[0]])
        findings.append(Finding("error", "cycle", f"circular dependency: {loop}"))
    for key in coverage.undefined_used:
        findings.append(Finding("warning", "undefined-term", f"term used but never defined: {key}"))
    for key in cut_vertices:
        findings.append(Finding("info", "articulation-point", f"single point of failure: {key}"))
    findings.extend(_threshold_findings(thresholds, density_value, depth, profile, core_numbers))
    findings.sort(key=lambda f: (_SEVERITY_RANK[f.severity], f.rule, f.message))

    return LintReport(
        node_count=graph.node_count,
        edge_count=graph.edge_count,
        density=density_value,
        dependency_depth=depth,
        dependency_path=witness,
        depth_unit="edges",
        orphan_count=profile.orphan_count,
        leaf_count=profile.leaf_count,
        orphan_ratio=profile.orphan_ratio,
        leaf_ratio=profile.leaf_ratio,
        degree_table=profile.degrees,
        core_numbers=core_numbers,
        articulation_points=cut_vertices,
        definition_coverage=coverage,
        cycles=cycles,
        findings=findings,
        notes=notes,
    )
