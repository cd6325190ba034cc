"""
DOT rendering of resource-flow graphs
"""
from graphviz import Digraph, escape

from shared.rfg.graph import ACQUIRE_NODE, ENTRY, EXIT, RELEASE_NODE, ResourceFlowGraph

_SHAPES = {
    ENTRY: {"shape": "circle"},
    EXIT: {"shape": "doublecircle"},
    ACQUIRE_NODE: {"shape": "box", "color": "orange"},
    RELEASE_NODE: {"shape": "box", "color": "darkgreen"},
}


def rfg_to_dot(rfg: ResourceFlowGraph) -> str:
    """DOT source of an RFG; nodes and edges are emitted in node-id order"""
    dot = Digraph(rfg.name or "rfg")
    dot.attr(rankdir="TB")
    ids = {}
    for i, node in enumerate(sorted(rfg.graph.nodes, key=lambda n: n.node_id)):
        ids[node] = f"n{i}"
        dot.node(ids[node], label=escape(node.label()), tooltip=escape(node.node_id), **_SHAPES.get(node.kind, {}))
    for a, b in sorted(rfg.graph.edges, key=lambda e: (e[0].node_id, e[1].node_id)):
        dot.edge(ids[a], ids[b])
    return dot.source
