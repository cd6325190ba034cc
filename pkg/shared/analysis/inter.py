"""
Inter-procedural composition: call-graph ordering, cycle breaking and
per-procedure summaries
"""
import logging
import warnings
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

import networkx as nx

from shared.analysis.intra import leaking_paths
from shared.automata import Witness
from shared.errors import CycleWarning
from shared.ir.model import AppModel, ResourceSpec
from shared.rfg.builder import build_rfg
from shared.rfg.graph import (
    TRANSFER_NODE,
    TRIVIAL_NODE,
    ResourceFlowGraph,
    RfgNode,
    is_neutral,
    splice_out,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Summary:
    """
    Result of analyzing one procedure with its callees resolved

    leaking_paths is empty for leak-free procedures. flow_graph is the
    procedure's call-free flow graph: callee graphs spliced in place of
    their transfer nodes and neutral nodes removed.
    """
    procedure: str
    leaking_paths: Tuple[Witness, ...]
    flow_graph: ResourceFlowGraph

    @property
    def leak_free(self) -> bool:
        return not self.leaking_paths


def _back_edges(graph: nx.DiGraph) -> List[Tuple[str, str]]:
    """Back edges of a depth-first search visiting roots and callees in name order"""
    found: List[Tuple[str, str]] = []
    visited: Set[str] = set()
    for root in sorted(graph):
        if root in visited:
            continue
        visited.add(root)
        on_stack = {root}
        stack = [(root, iter(sorted(graph.successors(root))))]
        while stack:
            node, callees = stack[-1]
            callee = next(callees, None)
            if callee is None:
                stack.pop()
                on_stack.discard(node)
            elif callee in on_stack:
                found.append((node, callee))
            elif callee not in visited:
                visited.add(callee)
                on_stack.add(callee)
                stack.append((callee, iter(sorted(graph.successors(callee)))))
    return found


def call_dag(app: AppModel) -> Tuple[nx.DiGraph, List[CycleWarning]]:
    """
    Internal call graph with cycles broken

    While a cycle remains, the lexicographically smallest (caller, callee)
    back edge of a name-ordered depth-first search is removed and reported.
    """
    graph = nx.DiGraph()
    graph.add_nodes_from(sorted(app.procedures))
    for caller in sorted(app.call_graph):
        graph.add_edges_from((caller, callee) for callee in sorted(app.call_graph[caller]))
    removed: List[CycleWarning] = []
    while True:
        back = _back_edges(graph)
        if not back:
            break
        caller, callee = min(back)
        graph.remove_edge(caller, callee)
        warning = CycleWarning(caller, callee)
        logger.warning(f"{warning}")
        removed.append(warning)
    return graph, removed


def resolve_calls(
    rfg: ResourceFlowGraph,
    callees: FrozenSet[str],
    summaries: Dict[str, "Summary"],
) -> ResourceFlowGraph:
    """
    Replace every transfer node calling one of `callees` by a copy of the
    callee's flow graph, entered from the node's predecessors and left
    towards its successors
    """
    graph = rfg.graph.copy()
    for node in sorted(rfg.nodes_of_kind(TRANSFER_NODE), key=lambda n: n.node_id):
        if node.callee not in callees:
            continue
        body = summaries[node.callee].flow_graph.prefixed(f"{node.node_id}>")
        enter = RfgNode(body.entry.node_id, TRIVIAL_NODE)
        leave = RfgNode(body.exit.node_id, TRIVIAL_NODE)
        inner = nx.relabel_nodes(body.graph, {body.entry: enter, body.exit: leave}, copy=True)
        preds = list(graph.predecessors(node))
        succs = list(graph.successors(node))
        graph.remove_node(node)
        graph.update(inner)
        graph.add_edges_from((p, enter) for p in preds if p != node)
        graph.add_edges_from((leave, s) for s in succs if s != node)
        if node in preds:
            # self-looping call
            graph.add_edge(leave, enter)
    return ResourceFlowGraph(graph, rfg.entry, rfg.exit, rfg.name)


def all_calls(
    app: AppModel,
    spec: ResourceSpec,
    track_uses: bool = False,
    uses_of: Optional[FrozenSet[str]] = None,
    dag: Optional[nx.DiGraph] = None,
    compute_leaks: bool = True,
) -> Dict[str, Summary]:
    """
    Summaries of every procedure, callees before callers

    Args:
        app: Application model
        spec: Resource list
        track_uses: Keep use nodes (validation mode)
        uses_of: References whose uses are tracked
        dag: Call graph with cycles already broken (see call_dag)
        compute_leaks: Run leak detection on each summary

    Returns:
        Mapping procedure name -> Summary
    """
    if dag is None:
        dag, removed = call_dag(app)
        for warning in removed:
            warnings.warn(warning, stacklevel=2)
    order = list(reversed(list(nx.lexicographical_topological_sort(dag))))
    summaries: Dict[str, Summary] = {}
    for name in order:
        rfg = build_rfg(app.procedures[name], spec, track_uses, uses_of)
        callees = frozenset(dag.successors(name))
        resolved = resolve_calls(rfg, callees, summaries) if callees else rfg
        flow_graph = splice_out(resolved, is_neutral)
        paths = tuple(leaking_paths(flow_graph, spec)) if compute_leaks else ()
        summaries[name] = Summary(name, paths, flow_graph)
        if paths:
            logger.info(f"Procedure '{name}' leaks {spec.name} on {len(paths)} path(s)")
    return summaries
