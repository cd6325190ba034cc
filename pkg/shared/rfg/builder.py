"""
Resource-flow graph construction from procedure control-flow graphs
"""
import logging
from typing import FrozenSet, List, Optional

import networkx as nx

from shared.ir.model import (
    ACQUIRE,
    CALL,
    OTHER,
    RELEASE,
    RELEASE_IF_HELD,
    RETURN,
    USE,
    AppModel,
    BasicBlock,
    Procedure,
    ResourceSpec,
    Statement,
)
from shared.rfg.graph import (
    ACQUIRE_NODE,
    ENTRY,
    EXIT,
    EXIT_NODE,
    RELEASE_NODE,
    TRANSFER_NODE,
    TRIVIAL_NODE,
    USE_NODE,
    ResourceFlowGraph,
    RfgNode,
)

logger = logging.getLogger(__name__)

# Other statements carrying this api rebind a local name to a synthesized field
ALIAS_API = "alias"


def tracked_refs(app: AppModel, spec: ResourceSpec) -> FrozenSet[str]:
    """References that hold an instance of the resource somewhere in the app"""
    refs = set()
    for proc in app.procedures.values():
        for _, stmt in proc.statements():
            if stmt.target is None:
                continue
            if stmt.op == ACQUIRE and spec.is_acquire(stmt.api):
                refs.add(stmt.target)
            elif stmt.op == OTHER and stmt.api == ALIAS_API:
                refs.add(stmt.target)
    return frozenset(refs)


def _classify(
    stmt: Statement,
    spec: ResourceSpec,
    track_uses: bool,
    node_id: str,
    origin,
    uses_of: Optional[FrozenSet[str]],
) -> Optional[RfgNode]:
    if stmt.op == ACQUIRE and spec.is_acquire(stmt.api):
        return RfgNode(node_id, ACQUIRE_NODE, op=stmt.api, target=stmt.target, origin=origin)
    if stmt.op in (RELEASE, RELEASE_IF_HELD) and spec.is_release(stmt.api):
        return RfgNode(
            node_id, RELEASE_NODE, op=stmt.api, target=stmt.target,
            guarded=stmt.op == RELEASE_IF_HELD, origin=origin,
        )
    if stmt.op == USE and track_uses and (uses_of is None or stmt.target in uses_of):
        return RfgNode(node_id, USE_NODE, target=stmt.target, origin=origin)
    if stmt.op == CALL:
        return RfgNode(node_id, TRANSFER_NODE, callee=stmt.callee, origin=origin)
    if stmt.op == OTHER and stmt.api and stmt.api != ALIAS_API:
        # invoked operation that is not part of the resource list
        return RfgNode(node_id, TRANSFER_NODE, op=stmt.api, target=stmt.target, origin=origin)
    if stmt.op == RETURN:
        return RfgNode(node_id, EXIT_NODE, origin=origin)
    return None


def build_path_graph(
    block: BasicBlock,
    spec: ResourceSpec,
    track_uses: bool = False,
    proc_name: str = "",
    uses_of: Optional[FrozenSet[str]] = None,
) -> List[RfgNode]:
    """
    Build the resource path graph of one basic block

    Args:
        block: Basic block to abstract
        spec: Active resource list
        track_uses: Emit UseNodes (validation mode)
        proc_name: Owning procedure, recorded in node ids and origins
        uses_of: When given, only uses of these references are tracked

    Returns:
        Nodes in statement order; consecutive nodes are joined by an edge.
        A block with no relevant statement yields a single TrivialNode.
    """
    nodes = []
    for index, stmt in enumerate(block.statements):
        node = _classify(
            stmt, spec, track_uses,
            node_id=f"{proc_name}/{block.id}/{index}",
            origin=(proc_name, block.id, index),
            uses_of=uses_of,
        )
        if node is None:
            continue
        nodes.append(node)
        if node.kind == EXIT_NODE:
            break
    if not nodes:
        nodes.append(RfgNode(f"{proc_name}/{block.id}/~", TRIVIAL_NODE))
    return nodes


def build_rfg(
    proc: Procedure,
    spec: ResourceSpec,
    track_uses: bool = False,
    uses_of: Optional[FrozenSet[str]] = None,
) -> ResourceFlowGraph:
    """
    Build the resource-flow graph of a procedure

    Path graphs are connected along CFG edges. Returning blocks and blocks
    without successors flow into the single exit node f; ExitNodes are
    collapsed into f.

    Args:
        proc: Procedure to abstract
        spec: Active resource list
        track_uses: Emit UseNodes (validation mode)
        uses_of: When given, only uses of these references are tracked

    Returns:
        ResourceFlowGraph with every node reachable from its entry
    """
    graph = nx.DiGraph()
    entry = RfgNode(f"{proc.name}/s", ENTRY)
    exit_ = RfgNode(f"{proc.name}/f", EXIT)
    graph.add_node(entry)
    graph.add_node(exit_)

    paths = {
        block_id: build_path_graph(block, spec, track_uses, proc.name, uses_of)
        for block_id, block in proc.blocks.items()
    }
    for path in paths.values():
        graph.add_nodes_from(path)
        graph.add_edges_from(zip(path, path[1:]))

    graph.add_edge(entry, paths[proc.entry][0])
    for block_id, block in proc.blocks.items():
        last = paths[block_id][-1]
        if last.kind == EXIT_NODE:
            continue
        if not block.successors:
            graph.add_edge(last, exit_)
        for succ in block.successors:
            graph.add_edge(last, paths[succ][0])

    for node in [n for n in graph.nodes if n.kind == EXIT_NODE]:
        for pred in list(graph.predecessors(node)):
            graph.add_edge(pred, exit_)
        graph.remove_node(node)

    rfg = ResourceFlowGraph(graph, entry, exit_, proc.name).prune_unreachable()
    logger.debug(f"Built RFG for '{proc.name}': {rfg!r}")
    return rfg
