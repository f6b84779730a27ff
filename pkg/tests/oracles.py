"""Brute-force oracles, independent of the library's algorithms.

Each oracle uses the most naive correct method available (re-counting,
iterative peeling, exhaustive enumeration) so that equivalence tests mean
something.
"""
from __future__ import annotations

from itertools import combinations, permutations

from contractgraph.assemble import ContractGraph
from contractgraph.ingest import MiniGraph
from contractgraph.ontology import node_identity_key


def undirected_adjacency(graph: ContractGraph) -> dict[str, set[str]]:
    adjacency: dict[str, set[str]] = {key: set() for key in graph.nodes}
    for edge in graph.edges.values():
        if edge.source != edge.target:
            adjacency[edge.source].add(edge.target)
            adjacency[edge.target].add(edge.source)
    return adjacency


def _component_count(adjacency: dict[str, set[str]], excluded: set[str]) -> int:
    remaining = set(adjacency) - excluded
    seen: set[str] = set()
    count = 0
    for start in remaining:
        if start in seen:
            continue
        count += 1
        frontier = [start]
        seen.add(start)
        while frontier:
            node = frontier.pop()
            for peer in adjacency[node]:
                if peer in remaining and peer not in seen:
                    seen.add(peer)
                    frontier.append(peer)
    return count


def brute_articulation_points(graph: ContractGraph) -> list[str]:
    adjacency = undirected_adjacency(graph)
    base = _component_count(adjacency, set())
    return sorted(
        node for node in adjacency if _component_count(adjacency, {node}) > base
    )


def brute_k_core(graph: ContractGraph) -> dict[str, int]:
    adjacency = undirected_adjacency(graph)
    core = {node: 0 for node in adjacency}
    for k in range(1, len(adjacency) + 1):
        alive = set(adjacency)
        changed = True
        while changed:
            changed = False
            for node in sorted(alive):
                if len(adjacency[node] & alive) < k:
                    alive.discard(node)
                    changed = True
        if not alive:
            break
        for node in alive:
            core[node] = k
    return core


def brute_longest_path(graph: ContractGraph, kinds) -> int:
    successors: dict[str, set[str]] = {key: set() for key in graph.nodes}
    for edge in graph.edges.values():
        if edge.kind in kinds and edge.source != edge.target:
            successors[edge.source].add(edge.target)

    best = 0

    def walk(node: str, length: int, visited: frozenset[str]) -> None:
        nonlocal best
        best = max(best, length)
        for peer in successors[node]:
            if peer not in visited:
                walk(peer, length + 1, visited | {peer})

    for start in successors:
        walk(start, 0, frozenset({start}))
    return best


def brute_is_acyclic(graph: ContractGraph) -> bool:
    indegree = {key: 0 for key in graph.nodes}
    successors: dict[str, list[str]] = {key: [] for key in graph.nodes}
    for edge in graph.edges.values():
        if edge.source == edge.target:
            return False
        successors[edge.source].append(edge.target)
        indegree[edge.target] += 1
    queue = [key for key, degree in indegree.items() if degree == 0]
    seen = 0
    while queue:
        node = queue.pop()
        seen += 1
        for peer in successors[node]:
            indegree[peer] -= 1
            if indegree[peer] == 0:
                queue.append(peer)
    return seen == len(graph.nodes)


def brute_cycle_representative_count(graph: ContractGraph) -> int:
    """Number of non-trivial mutual-reachability classes plus self-loops."""
    keys = sorted(graph.nodes)
    index = {key: i for i, key in enumerate(keys)}
    n = len(keys)
    reach = [[False] * n for _ in range(n)]
    self_loops = set()
    for edge in graph.edges.values():
        if edge.source == edge.target:
            self_loops.add(edge.source)
        else:
            reach[index[edge.source]][index[edge.target]] = True
    for mid in range(n):
        for a in range(n):
            if reach[a][mid]:
                row_mid = reach[mid]
                row_a = reach[a]
                for b in range(n):
                    if row_mid[b]:
                        row_a[b] = True
    assigned = [False] * n
    nontrivial = 0
    for a in range(n):
        if assigned[a]:
            continue
        members = [a] + [b for b in range(a + 1, n) if reach[a][b] and reach[b][a]]
        for b in members:
            assigned[b] = True
        if len(members) > 1:
            nontrivial += 1
    return nontrivial + len(self_loops)


def brute_ged(g1: MiniGraph, g2: MiniGraph) -> int:
    """Exhaustive minimum over all injective node mappings.

    Only meaningful for dangle-free minigraphs of a handful of nodes.
    """
    keys1 = [node_identity_key(node) for node in g1.nodes]
    keys2 = [node_identity_key(node) for node in g2.nodes]
    ids1 = {node.id: i for i, node in enumerate(g1.nodes)}
    ids2 = {node.id: i for i, node in enumerate(g2.nodes)}
    edges1 = [(ids1[e.source], ids1[e.target], e.kind.value) for e in g1.edges]
    edges2 = {(ids2[e.source], ids2[e.target], e.kind.value) for e in g2.edges}
    n1, n2 = len(keys1), len(keys2)
    m1, m2 = len(edges1), len(edges2)

    best = n1 + n2 + m1 + m2
    for size in range(min(n1, n2) + 1):
        for chosen1 in combinations(range(n1), size):
            for chosen2 in permutations(range(n2), size):
                mapping = dict(zip(chosen1, chosen2))
                node_cost = (n1 - size) + (n2 - size)
                node_cost += sum(1 for a, b in mapping.items() if keys1[a] != keys2[b])
                preserved = sum(
                    1
                    for (a, b, kind) in edges1
                    if a in mapping and b in mapping and (mapping[a], mapping[b], kind) in edges2
                )
                best = min(best, node_cost + m1 + m2 - 2 * preserved)
    return best
