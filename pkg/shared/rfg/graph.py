"""
Resource-flow graph data types
"""
from dataclasses import dataclass, replace
from typing import Callable, Iterable, List, Optional

import networkx as nx

from shared.ir.model import Origin

# Node kinds
ENTRY = "entry"
EXIT = "exit"
ACQUIRE_NODE = "acquire"
RELEASE_NODE = "release"
TRANSFER_NODE = "transfer"
TRIVIAL_NODE = "trivial"
EXIT_NODE = "return"
USE_NODE = "use"


@dataclass(frozen=True)
class RfgNode:
    """
    One resource-flow graph node.

    node_id is unique within a graph; origin maps the node back to the
    IR statement it models (None for synthetic nodes).
    """
    node_id: str
    kind: str
    op: Optional[str] = None
    target: Optional[str] = None
    callee: Optional[str] = None
    guarded: bool = False
    origin: Optional[Origin] = None

    def relabel(self, prefix: str) -> "RfgNode":
        return replace(self, node_id=f"{prefix}{self.node_id}")

    def label(self) -> str:
        if self.kind in (ENTRY, EXIT):
            return "s" if self.kind == ENTRY else "f"
        if self.kind in (ACQUIRE_NODE, RELEASE_NODE):
            guard = "?" if self.guarded else ""
            return f"{self.kind}:{guard}{self.op}"
        if self.kind == TRANSFER_NODE:
            return f"transfer:{self.callee}"
        if self.kind == USE_NODE:
            return f"use:{self.target}"
        return self.kind


class ResourceFlowGraph:
    """
    Directed graph with a single entry node s and a single exit node f.

    Backed by a networkx DiGraph whose nodes are RfgNode values.
    """

    def __init__(self, graph: nx.DiGraph, entry: RfgNode, exit: RfgNode, name: str = ""):
        self.graph = graph
        self.entry = entry
        self.exit = exit
        self.name = name

    @property
    def nodes(self) -> List[RfgNode]:
        return list(self.graph.nodes)

    @property
    def edges(self):
        return list(self.graph.edges)

    def successors(self, node: RfgNode) -> List[RfgNode]:
        return list(self.graph.successors(node))

    def predecessors(self, node: RfgNode) -> List[RfgNode]:
        return list(self.graph.predecessors(node))

    def nodes_of_kind(self, *kinds: str) -> List[RfgNode]:
        return [n for n in self.graph.nodes if n.kind in kinds]

    def __len__(self):
        return self.graph.number_of_nodes()

    def __repr__(self):
        return f"ResourceFlowGraph({self.name!r}, |V|={self.graph.number_of_nodes()}, |E|={self.graph.number_of_edges()})"

    def copy(self) -> "ResourceFlowGraph":
        return ResourceFlowGraph(self.graph.copy(), self.entry, self.exit, self.name)

    def prefixed(self, prefix: str) -> "ResourceFlowGraph":
        """Copy with every node id prefixed (for splicing several instances into one graph)"""
        mapping = {n: n.relabel(prefix) for n in self.graph.nodes}
        graph = nx.relabel_nodes(self.graph, mapping, copy=True)
        return ResourceFlowGraph(graph, mapping[self.entry], mapping[self.exit], self.name)

    def prune_unreachable(self) -> "ResourceFlowGraph":
        keep = nx.descendants(self.graph, self.entry) | {self.entry}
        keep.add(self.exit)
        graph = self.graph.subgraph(keep).copy()
        return ResourceFlowGraph(graph, self.entry, self.exit, self.name)


def splice_out(rfg: ResourceFlowGraph, neutral: Callable[[RfgNode], bool]) -> ResourceFlowGraph:
    """
    Remove every neutral node, connecting each of its predecessors to each
    of its successors. s and f are never removed. The set of s-to-f node
    label sequences restricted to non-neutral nodes is unchanged.
    """
    graph = rfg.graph.copy()
    for node in sorted((n for n in rfg.graph.nodes if neutral(n)), key=lambda n: n.node_id):
        if node in (rfg.entry, rfg.exit):
            continue
        preds = [p for p in graph.predecessors(node) if p != node]
        succs = [s for s in graph.successors(node) if s != node]
        graph.remove_node(node)
        graph.add_edges_from((p, s) for p in preds for s in succs)
    return ResourceFlowGraph(graph, rfg.entry, rfg.exit, rfg.name)


def series_reduce(rfg: ResourceFlowGraph, neutral: Callable[[RfgNode], bool]) -> ResourceFlowGraph:
    """
    Splice neutral nodes with exactly one predecessor and one successor,
    repeatedly. Never increases cyclomatic complexity.
    """
    graph = rfg.graph.copy()
    changed = True
    while changed:
        changed = False
        for node in sorted(list(graph.nodes), key=lambda n: n.node_id):
            if node in (rfg.entry, rfg.exit) or not neutral(node):
                continue
            preds = list(graph.predecessors(node))
            succs = list(graph.successors(node))
            if len(preds) == 1 and len(succs) == 1 and node not in preds:
                graph.remove_node(node)
                graph.add_edge(preds[0], succs[0])
                changed = True
    return ResourceFlowGraph(graph, rfg.entry, rfg.exit, rfg.name)


def is_neutral(node: RfgNode) -> bool:
    """Trivial and unresolved transfer nodes do not affect resource state"""
    return node.kind in (TRIVIAL_NODE, TRANSFER_NODE)


def chain(graphs: Iterable[ResourceFlowGraph], name: str = "") -> ResourceFlowGraph:
    """
    Concatenate graphs: each graph's f is wired to the next graph's s.
    Inner s/f nodes become trivial join points.
    """
    graphs = list(graphs)
    combined = nx.DiGraph()
    entry = RfgNode(node_id=f"{name}:s", kind=ENTRY)
    exit_ = RfgNode(node_id=f"{name}:f", kind=EXIT)
    combined.add_node(entry)
    combined.add_node(exit_)
    previous = entry
    for index, g in enumerate(graphs):
        part = g.prefixed(f"{index}:")
        mapping = {
            part.entry: RfgNode(node_id=part.entry.node_id, kind=TRIVIAL_NODE),
            part.exit: RfgNode(node_id=part.exit.node_id, kind=TRIVIAL_NODE),
        }
        body = nx.relabel_nodes(part.graph, mapping, copy=True)
        combined.update(body)
        combined.add_edge(previous, mapping[part.entry])
        previous = mapping[part.exit]
    combined.add_edge(previous, exit_)
    return ResourceFlowGraph(combined, entry, exit_, name)
