"""
Intra-procedural leak detection on resource-flow graphs
"""
import logging
from functools import lru_cache
from typing import Dict, List, Optional

from shared.automata import (
    DETECTION,
    Witness,
    blame_automaton,
    complement,
    emptiness,
    flow_automaton,
    intersect,
    node_trace,
    resource_automaton,
)
from shared.automata.resource import MARK_PREFIX
from shared.ir.model import Origin, ResourceSpec
from shared.rfg.graph import ACQUIRE_NODE, ResourceFlowGraph

logger = logging.getLogger(__name__)


@lru_cache(maxsize=64)
def leak_automaton(spec: ResourceSpec):
    """Complement of the detection-mode resource automaton"""
    return complement(resource_automaton(spec, DETECTION))


@lru_cache(maxsize=64)
def _blame(spec: ResourceSpec):
    return blame_automaton(spec)


def may_leak(rfg: ResourceFlowGraph, spec: ResourceSpec) -> bool:
    """True iff some s-to-f path of the graph ends with a pending acquire"""
    leaks = leak_automaton(spec)
    flow = flow_automaton(rfg, alphabet=leaks.alphabet)
    return emptiness(intersect(leaks, flow)) is not None


def blamed_origin(witness: Witness) -> Optional[Origin]:
    """Origin of the marked acquire in a blame witness"""
    for symbol, node in zip(witness.symbols, witness.provenance):
        if symbol.startswith(MARK_PREFIX):
            return node.origin
    return None


def leaking_paths_by_origin(rfg: ResourceFlowGraph, spec: ResourceSpec) -> Dict[Origin, Witness]:
    """
    Shortest leaking witness for every acquire origin that can still be
    pending when the graph reaches f

    Args:
        rfg: Resource-flow graph without unresolved internal calls
        spec: Resource list

    Returns:
        Mapping acquire origin -> witness, in origin order. Witness symbols
        read the blamed acquire as a marked symbol; provenance lists the
        node that read each symbol.
    """
    if not may_leak(rfg, spec):
        return {}
    blame = _blame(spec)
    origins = sorted({n.origin for n in rfg.nodes_of_kind(ACQUIRE_NODE) if n.origin is not None})
    found: Dict[Origin, Witness] = {}
    for origin in origins:
        flow = flow_automaton(rfg, alphabet=blame.alphabet, marked_origin=origin)
        witness = emptiness(intersect(blame, flow))
        if witness is None:
            continue
        found[origin] = witness.with_provenance(node_trace(flow, witness.symbols))
    logger.debug(f"RFG '{rfg.name}' leaks {spec.name} from {len(found)} acquire site(s)")
    return found


def leaking_paths(rfg: ResourceFlowGraph, spec: ResourceSpec) -> List[Witness]:
    """Leaking witnesses of a graph, one per pending acquire origin (empty when leak-free)"""
    return list(leaking_paths_by_origin(rfg, spec).values())
