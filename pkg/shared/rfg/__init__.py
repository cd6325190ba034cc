"""
Resource-flow graphs: construction, statistics and DOT output
"""
from .graph import (
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
    chain,
    is_neutral,
    series_reduce,
    splice_out,
)
from .builder import ALIAS_API, build_path_graph, build_rfg, tracked_refs
from .metrics import app_stats, cfg_graph, cyclomatic, procedure_stats, stats_document
from .dot import rfg_to_dot

__all__ = [
    'ACQUIRE_NODE', 'ENTRY', 'EXIT', 'EXIT_NODE', 'RELEASE_NODE', 'TRANSFER_NODE', 'TRIVIAL_NODE', 'USE_NODE',
    'ResourceFlowGraph', 'RfgNode', 'chain', 'is_neutral', 'series_reduce', 'splice_out',
    'ALIAS_API', 'build_path_graph', 'build_rfg', 'tracked_refs',
    'app_stats', 'cfg_graph', 'cyclomatic', 'procedure_stats', 'stats_document',
    'rfg_to_dot',
]
