"""Graph exporters: canonical JSON, Graphviz DOT, and GraphML.

Output is byte-deterministic: nodes and edges are emitted sorted by
identity key so visualizations diff cleanly across runs.
"""
from __future__ import annotations

from xml.etree import ElementTree

from .assemble import ContractGraph, graph_to_json
from .errors import ConfigError
from .ontology import NodeKind, node_discriminator

EXPORT_FORMATS = ("graph-json", "dot", "graphml")

# Shape/color classes per node kind for DOT rendering.
_KIND_STYLES: dict[NodeKind, tuple[str, str]] = {
    NodeKind.CLAUSE: ("box", "lightblue"),
    NodeKind.PARTY: ("ellipse", "lightgoldenrod"),
    NodeKind.DEFINED_TERM: ("hexagon", "lightgreen"),
    NodeKind.VALUE: ("diamond", "lightpink"),
    NodeKind.OBLIGATION: ("octagon", "orange"),
    NodeKind.RIGHT: ("octagon", "palegreen"),
    NodeKind.PROHIBITION: ("octagon", "salmon"),
    NodeKind.CONDITION: ("trapezium", "khaki"),
    NodeKind.REFERENCE: ("note", "lightgray"),
}


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(graph: ContractGraph) -> str:
    lines = [f"digraph {_dot_quote(graph.contract_id)} {{"]
    lines.append("  rankdir=TB;")
    for key in graph.node_keys():
        node = graph.nodes[key]
        shape, color = _KIND_STYLES[node.kind]
        label = node_discriminator(node)
        lines.append(
            f"  {_dot_quote(key)} [label={_dot_quote(label)} shape={shape} "
            f'style=filled fillcolor={_dot_quote(color)} class={_dot_quote(node.kind.value)}];'
        )
    for edge in graph.edge_list():
        lines.append(
            f"  {_dot_quote(edge.source)} -> {_dot_quote(edge.target)} "
            f"[label={_dot_quote(edge.kind.value)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def graph_to_graphml(graph: ContractGraph) -> str:
    root = ElementTree.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
    for key_id, target, name in (
        ("d_kind", "node", "kind"),
        ("d_label", "node", "label"),
        ("d_edge_kind", "edge", "kind"),
    ):
        ElementTree.SubElement(
            root,
            "key",
            attrib={"id": key_id, "for": target, "attr.name": name, "attr.type": "string"},
        )
    graph_el = ElementTree.SubElement(
        root, "graph", attrib={"id": graph.contract_id, "edgedefault": "directed"}
    )
    for key in graph.node_keys():
        node = graph.nodes[key]
        node_el = ElementTree.SubElement(graph_el, "node", attrib={"id": key})
        kind_el = ElementTree.SubElement(node_el, "data", attrib={"key": "d_kind"})
        kind_el.text = node.kind.value
        label_el = ElementTree.SubElement(node_el, "data", attrib={"key": "d_label"})
        label_el.text = node_discriminator(node)
    for edge in graph.edge_list():
        edge_el = ElementTree.SubElement(
            graph_el, "edge", attrib={"source": edge.source, "target": edge.target}
        )
        data_el = ElementTree.SubElement(edge_el, "data", attrib={"key": "d_edge_kind"})
        data_el.text = edge.kind.value
    ElementTree.indent(root)
    return ElementTree.tostring(root, encoding="unicode", xml_declaration=True) + "\n"


def export_graph(graph: ContractGraph, fmt: str) -> str:
    if fmt == "graph-json":
        return graph_to_json(graph)
    if fmt == "dot":
        return graph_to_dot(graph)
    if fmt == "graphml":
        return graph_to_graphml(graph)
    raise ConfigError(f"unknown export format: {fmt!r} (expected one of {', '.join(EXPORT_FORMATS)})")
