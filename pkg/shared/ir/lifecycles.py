"""
Built-in component lifecycle graphs
"""
from typing import Mapping, Optional

from shared.ir.model import CallbackEdge, CallbackGraph

# Simplified activity lifecycle: Starting -> Running, Running loops through
# pause/resume, Running -> Closed.
ACTIVITY = CallbackGraph(
    name="activity",
    states=("Starting", "Running", "Closed"),
    initial="Starting",
    edges=(
        CallbackEdge("Starting", "Running", ("onCreate", "onStart", "onResume")),
        CallbackEdge("Running", "Running", ("onPause", "onResume")),
        CallbackEdge("Running", "Closed", ("onPause", "onStop", "onDestroy")),
    ),
)

BUILTIN_LIFECYCLES = {ACTIVITY.name: ACTIVITY}


def resolve_lifecycle(name: str, custom: Optional[Mapping[str, CallbackGraph]] = None) -> Optional[CallbackGraph]:
    """
    Look up a lifecycle graph by name

    Args:
        name: lifecycle name from a component declaration
        custom: lifecycles declared by the app document (take precedence)

    Returns:
        The callback graph, or None if unknown
    """
    if custom and name in custom:
        return custom[name]
    return BUILTIN_LIFECYCLES.get(name)
