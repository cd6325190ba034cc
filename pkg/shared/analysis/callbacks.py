"""
Callback-graph unrolling
"""
import logging
from collections import Counter
from typing import List, Mapping, Optional, Sequence, Tuple

from shared.errors import NoReleaseCallback
from shared.ir.lifecycles import resolve_lifecycle
from shared.ir.model import CallbackEdge, CallbackGraph, Component, ResourceSpec

logger = logging.getLogger(__name__)

CallbackSequence = Tuple[str, ...]


def invoked_release_callbacks(spec: ResourceSpec, lifecycle: CallbackGraph) -> List[str]:
    """Release callbacks of the resource the lifecycle can invoke, in preference order"""
    available = lifecycle.callbacks()
    return [cb for cb in spec.release_callbacks if cb in available]


def choose_release_callback(
    component: Component,
    spec: ResourceSpec,
    lifecycle: CallbackGraph,
    policy: str = "early",
) -> str:
    """
    Callback that receives fixes for a component

    The earliest (or, with the late policy, the last) release callback
    the component implements; when it implements none, the earliest (or
    last) one its lifecycle invokes.

    Raises:
        NoReleaseCallback: if the lifecycle invokes none of them
    """
    candidates = invoked_release_callbacks(spec, lifecycle)
    if not candidates:
        raise NoReleaseCallback(
            f"Lifecycle '{lifecycle.name}' of '{component.name}' never invokes any of {list(spec.release_callbacks)}",
            entity=component.name,
        )
    implemented = [cb for cb in candidates if cb in component.callbacks]
    pool = implemented or candidates
    return pool[0] if policy == "early" else pool[-1]


def _truncate(edge: CallbackEdge, targets: Sequence[str]) -> Optional[Tuple[str, ...]]:
    for index, callback in enumerate(edge.callbacks):
        if callback in targets:
            return edge.callbacks[: index + 1]
    return None


def unroll_lifecycle(lifecycle: CallbackGraph, targets: Sequence[str], depth: int) -> List[CallbackSequence]:
    """
    Callback sequences of all lifecycle paths that end invoking a target

    Paths start in the initial state and visit every state (the initial
    one included) at most `depth` times. A path ends with an edge whose
    callbacks include a target; its sequence stops right after the first
    target callback of that edge.
    """
    if depth < 1:
        raise ValueError("Unrolling depth must be at least 1")
    found = set()
    visits = Counter({lifecycle.initial: 1})
    prefix: List[str] = []

    def explore(state: str):
        for edge in lifecycle.out_edges(state):
            if visits[edge.target] >= depth:
                continue
            tail = _truncate(edge, targets)
            if tail is not None:
                found.add(tuple(prefix) + tail)
            visits[edge.target] += 1
            prefix.extend(edge.callbacks)
            explore(edge.target)
            del prefix[len(prefix) - len(edge.callbacks):]
            visits[edge.target] -= 1

    explore(lifecycle.initial)
    return sorted(found)


def unroll_callbacks(
    component: Component,
    spec: ResourceSpec,
    depth: int,
    lifecycles: Optional[Mapping[str, CallbackGraph]] = None,
    targets: Optional[Sequence[str]] = None,
) -> List[CallbackSequence]:
    """
    Unrolled callback sequences of a component

    Args:
        component: Component whose lifecycle is unrolled
        spec: Resource list providing the release callbacks
        depth: Per-state traversal bound D >= 1
        lifecycles: Custom lifecycle graphs of the app
        targets: Release callbacks to unroll towards (default: every
            release callback the lifecycle invokes)

    Returns:
        Sorted, deduplicated callback-name sequences; unimplemented
        callbacks stay in the sequences

    Raises:
        NoReleaseCallback: if the lifecycle invokes no release callback
    """
    lifecycle = resolve_lifecycle(component.lifecycle, lifecycles or {})
    candidates = invoked_release_callbacks(spec, lifecycle)
    if not candidates:
        raise NoReleaseCallback(
            f"Lifecycle '{lifecycle.name}' of '{component.name}' never invokes any of {list(spec.release_callbacks)}",
            entity=component.name,
        )
    sequences = unroll_lifecycle(lifecycle, list(targets) if targets else candidates, depth)
    logger.debug(f"Unrolled {len(sequences)} callback sequence(s) for '{component.name}' at D={depth}")
    return sequences
