"""
Validation of (patched) apps against the safety properties of a resource
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

from shared.analysis.callbacks import (
    CallbackSequence,
    choose_release_callback,
    invoked_release_callbacks,
    unroll_lifecycle,
)
from shared.analysis.engine import origin_to_dict, sequence_graph
from shared.analysis.inter import all_calls, call_dag
from shared.automata import (
    DOUBLE_RELEASE,
    NEW_LEAK,
    USE_AFTER_RELEASE,
    VIOLATION_KINDS,
    Witness,
    emptiness,
    flow_automaton,
    intersect,
    node_trace,
    violation_automaton,
)
from shared.automata.resource import plain
from shared.ir.lifecycles import resolve_lifecycle
from shared.ir.model import AppModel, ResourceSpec
from shared.rfg.builder import tracked_refs

logger = logging.getLogger(__name__)

VALID = "Valid"
INVALID = "Invalid"

# Kinds checked on sequences towards each release callback
SAFETY_KINDS = (USE_AFTER_RELEASE, DOUBLE_RELEASE)


@lru_cache(maxsize=64)
def _violations(spec: ResourceSpec, kind: str):
    return violation_automaton(spec, kind)


@dataclass(frozen=True)
class Violation:
    kind: str
    component: str
    callback_sequence: CallbackSequence
    witness: Witness

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "component": self.component,
            "callback_sequence": list(self.callback_sequence),
            "witness": [plain(s) for s in self.witness.symbols],
            "trace": [origin_to_dict(node.origin) for node in self.witness.provenance],
        }


@dataclass
class ValidationResult:
    violations: List[Violation] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return INVALID if self.violations else VALID

    @property
    def valid(self) -> bool:
        return not self.violations

    def kinds(self) -> List[str]:
        return sorted({v.kind for v in self.violations})

    def for_component(self, name: str) -> "ValidationResult":
        return ValidationResult([v for v in self.violations if v.component == name])

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "violations": [v.to_dict() for v in self.violations]}


def _first_violation(graph, spec: ResourceSpec, kinds) -> Dict[str, Witness]:
    alphabet = _violations(spec, kinds[0]).alphabet
    flow = flow_automaton(graph, alphabet=alphabet, track_uses=True)
    found = {}
    for kind in kinds:
        witness = emptiness(intersect(_violations(spec, kind), flow))
        if witness is not None:
            found[kind] = witness.with_provenance(node_trace(flow, witness.symbols))
    return found


def validate(
    app: AppModel,
    spec: ResourceSpec,
    depth: int,
    release_policy: str = "early",
) -> ValidationResult:
    """
    Check an app for use-after-release, double release and leaks

    Uses of every reference that holds the resource are tracked and
    guarded releases release only what is held. Use-after-release and
    double release are searched on callback sequences unrolled towards
    each release callback in turn; leaks on sequences towards the callback
    selected by the release policy.

    Args:
        app: Application model, typically patched
        spec: Resource list
        depth: Unrolling depth D >= 1
        release_policy: "early" or "late"

    Returns:
        ValidationResult with at most one violation per (component, kind),
        witnessed on the shortest callback sequence
    """
    if depth < 1:
        raise ValueError("Unrolling depth must be at least 1")
    dag, _ = call_dag(app)
    summaries = all_calls(
        app, spec, track_uses=True, uses_of=tracked_refs(app, spec), dag=dag, compute_leaks=False,
    )

    found: Dict[Tuple[str, str], Violation] = {}
    for component in sorted(app.components, key=lambda c: c.name):
        lifecycle = resolve_lifecycle(component.lifecycle, app.lifecycles)
        candidates = invoked_release_callbacks(spec, lifecycle)
        if not candidates:
            logger.warning(f"Component '{component.name}' is not validated: no release callback is ever invoked")
            continue
        target = choose_release_callback(component, spec, lifecycle, release_policy)
        plans: Dict[CallbackSequence, List[str]] = {}
        for release_callback in candidates:
            for sequence in unroll_lifecycle(lifecycle, [release_callback], depth):
                kinds = plans.setdefault(sequence, [])
                kinds.extend(k for k in SAFETY_KINDS if k not in kinds)
        for sequence in unroll_lifecycle(lifecycle, [target], depth):
            plans.setdefault(sequence, []).append(NEW_LEAK)

        for index, sequence in enumerate(sorted(plans, key=lambda s: (len(s), s))):
            kinds = [k for k in VIOLATION_KINDS if k in plans[sequence] and (component.name, k) not in found]
            if not kinds:
                continue
            graph = sequence_graph(app, component, sequence, summaries, f"{component.name}#v{index}")
            for kind, witness in _first_violation(graph, spec, kinds).items():
                found[(component.name, kind)] = Violation(kind, component.name, sequence, witness)

    result = ValidationResult(sorted(found.values(), key=lambda v: (v.component, VIOLATION_KINDS.index(v.kind))))
    logger.info(f"Validated '{app.name}' for {spec.name} at D={depth}: {result.verdict}")
    return result
