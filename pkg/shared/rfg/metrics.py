"""
Cyclomatic complexity and abstraction statistics
"""
import logging
from typing import Union

import networkx as nx
import pandas as pd

from shared.ir.model import RETURN, AppModel, Procedure, ResourceSpec
from shared.rfg.builder import build_rfg
from shared.rfg.graph import ResourceFlowGraph, is_neutral, series_reduce

logger = logging.getLogger(__name__)

STATS_COLUMNS = [
    "procedure", "cfg_nodes", "cfg_edges", "cfg_m",
    "rfg_nodes", "rfg_edges", "rfg_m", "ratio",
]

_VIRTUAL_EXIT = "<exit>"


def cyclomatic(graph: Union[nx.DiGraph, ResourceFlowGraph]) -> int:
    """
    Cyclomatic complexity E - N + 2P

    P is the number of weakly connected components.
    """
    if isinstance(graph, ResourceFlowGraph):
        graph = graph.graph
    if graph.number_of_nodes() == 0:
        return 0
    components = nx.number_weakly_connected_components(graph)
    return graph.number_of_edges() - graph.number_of_nodes() + 2 * components


def cfg_graph(proc: Procedure) -> nx.DiGraph:
    """Block graph of a procedure, returning blocks joined at a virtual exit"""
    graph = nx.DiGraph()
    graph.add_nodes_from(proc.blocks)
    for block in proc.blocks.values():
        graph.add_edges_from((block.id, s) for s in block.successors)
        if not block.successors or any(s.op == RETURN for s in block.statements):
            graph.add_edge(block.id, _VIRTUAL_EXIT)
    return graph


def procedure_stats(proc: Procedure, spec: ResourceSpec) -> dict:
    """
    Size and complexity of a procedure's CFG and RFG

    CFG counts include the virtual exit that returning blocks join, so
    cfg_m == cfg_edges - cfg_nodes + 2 for a connected procedure.
    M(RFG) is measured after series reduction of neutral nodes, which
    never raises complexity.
    """
    cfg = cfg_graph(proc)
    rfg = build_rfg(proc, spec)
    reduced = series_reduce(rfg, is_neutral)
    if reduced.graph.degree(reduced.exit) == 0:
        # procedure never terminates
        reduced.graph.remove_node(reduced.exit)
    cfg_m = cyclomatic(cfg)
    rfg_m = cyclomatic(reduced)
    return {
        "procedure": proc.name,
        "cfg_nodes": cfg.number_of_nodes(),
        "cfg_edges": cfg.number_of_edges(),
        "cfg_m": cfg_m,
        "rfg_nodes": rfg.graph.number_of_nodes(),
        "rfg_edges": rfg.graph.number_of_edges(),
        "rfg_m": rfg_m,
        "ratio": round(rfg_m / cfg_m, 4) if cfg_m else 0.0,
    }


def app_stats(app: AppModel, spec: ResourceSpec) -> pd.DataFrame:
    """
    Per-procedure statistics plus a whole-app row named after the app

    The whole-app complexity is the sum over procedures (the disjoint
    union of their graphs).
    """
    rows = [procedure_stats(proc, spec) for _, proc in sorted(app.procedures.items())]
    frame = pd.DataFrame(rows, columns=STATS_COLUMNS)
    totals = frame.drop(columns=["procedure", "ratio"]).sum(numeric_only=True)
    total_row = {"procedure": f"<{app.name}>", **{k: int(v) for k, v in totals.items()}}
    total_row["ratio"] = round(total_row["rfg_m"] / total_row["cfg_m"], 4) if total_row["cfg_m"] else 0.0
    frame = pd.concat([frame, pd.DataFrame([total_row], columns=STATS_COLUMNS)], ignore_index=True)
    logger.info(f"Stats for app '{app.name}' ({spec.name}): {len(rows)} procedures, ratio {total_row['ratio']}")
    return frame


def stats_document(app: AppModel, spec: ResourceSpec) -> dict:
    frame = app_stats(app, spec)
    records = frame.to_dict(orient="records")
    return {
        "app": app.name,
        "resource": spec.name,
        "procedures": records[:-1],
        "total": records[-1],
    }
