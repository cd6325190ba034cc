"""
Brute-force reference semantics

Executes every bounded run of every unrolled callback sequence on the IR
directly, tracking resource state by simulation. Nothing here goes
through resource-flow graphs or automata.
"""
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from shared.config import get_loop_bound, get_oracle_budget
from shared.errors import BudgetExceeded
from shared.ir.lifecycles import resolve_lifecycle
from shared.ir.model import (
    ACQUIRE,
    CALL,
    OTHER,
    RELEASE,
    RELEASE_IF_HELD,
    RETURN,
    USE,
    AppModel,
    CallbackGraph,
    Component,
    Origin,
    ResourceSpec,
    Statement,
)

logger = logging.getLogger(__name__)

USE_AFTER_RELEASE = "UseAfterRelease"
DOUBLE_RELEASE = "DoubleRelease"
NEW_LEAK = "NewLeak"

_ALIAS = "alias"


@dataclass(frozen=True)
class SimState:
    """
    Resource state of one run

    `held` is the stack of (acquire op, origin) pairs for reentrant
    resources; for non-reentrant ones it holds each acquired op once, with
    the origin that first acquired it, ordered by op. `violation` is the
    first safety violation seen. `trace` lists the resource statements of
    one run reaching this state.
    """
    held: Tuple[Tuple[str, Origin], ...] = ()
    violation: Optional[str] = None
    trace: Tuple[Origin, ...] = field(default=(), compare=False)

    def pending(self) -> Set[Origin]:
        return {origin for _, origin in self.held}


# -- callback sequences ----------------------------------------------------

def release_targets(spec: ResourceSpec, lifecycle: CallbackGraph) -> List[str]:
    invoked = {cb for edge in lifecycle.edges for cb in edge.callbacks}
    return [cb for cb in spec.release_callbacks if cb in invoked]


def policy_target(component: Component, spec: ResourceSpec, lifecycle: CallbackGraph, policy: str) -> Optional[str]:
    targets = release_targets(spec, lifecycle)
    pool = [cb for cb in targets if cb in component.callbacks] or targets
    if not pool:
        return None
    return pool[0] if policy == "early" else pool[-1]


def callback_sequences(lifecycle: CallbackGraph, targets: Sequence[str], depth: int) -> List[Tuple[str, ...]]:
    """Every lifecycle run visiting each state at most `depth` times, cut after a target callback"""
    found = set()
    pending = [(lifecycle.initial, Counter({lifecycle.initial: 1}), ())]
    while pending:
        state, visits, prefix = pending.pop()
        for edge in lifecycle.edges:
            if edge.source != state or visits[edge.target] >= depth:
                continue
            hits = [i for i, cb in enumerate(edge.callbacks) if cb in targets]
            if hits:
                found.add(prefix + edge.callbacks[: hits[0] + 1])
            pending.append((edge.target, visits + Counter({edge.target: 1}), prefix + edge.callbacks))
    return sorted(found)


# -- execution -------------------------------------------------------------

class Simulator:
    """
    Bounded executions of an app for one resource

    Every block runs at most `loop_bound` times per procedure invocation.
    Internal calls run the callee's body; a call back into a procedure
    already on the call stack is skipped.
    """

    def __init__(self, app: AppModel, spec: ResourceSpec, loop_bound: int, budget: int, track_uses: bool = False):
        self.app = app
        self.spec = spec
        self.loop_bound = loop_bound
        self.budget = budget
        self.track_uses = track_uses
        self.explored = 0
        self.refs = self._refs()
        self._memo: Dict[Tuple, FrozenSet[SimState]] = {}

    def _refs(self) -> FrozenSet[str]:
        refs = set()
        for proc in self.app.procedures.values():
            for _, stmt in proc.statements():
                if stmt.target and (
                    (stmt.op == ACQUIRE and self.spec.is_acquire(stmt.api))
                    or (stmt.op == OTHER and stmt.api == _ALIAS)
                ):
                    refs.add(stmt.target)
        return frozenset(refs)

    def _acquire(self, state: SimState, op: str, origin: Origin) -> SimState:
        trace = state.trace + (origin,)
        if self.spec.reentrant:
            return SimState(state.held + ((op, origin),), state.violation, trace)
        if any(held_op == op for held_op, _ in state.held):
            return SimState(state.held, state.violation, trace)
        return SimState(tuple(sorted(state.held + ((op, origin),))), state.violation, trace)

    def _release(self, state: SimState, op: str, guarded: bool, origin: Origin) -> SimState:
        trace = state.trace + (origin,)
        held = list(state.held)
        violation = None
        if not self.spec.reentrant:
            kept = [(a, o) for a, o in held if not self.spec.matches(a, op)]
            if len(kept) == len(held) and not guarded:
                violation = DOUBLE_RELEASE
            held = kept
        elif guarded:
            while held and self.spec.matches(held[-1][0], op):
                held.pop()
        elif held and self.spec.matches(held[-1][0], op):
            held.pop()
        else:
            violation = DOUBLE_RELEASE
        if violation and self.track_uses:
            return SimState(state.held, violation, trace)
        return SimState(tuple(held), state.violation, trace)

    def _step(self, stmt: Statement, origin: Origin, state: SimState, active: FrozenSet[str]) -> FrozenSet[SimState]:
        if state.violation is not None:
            return frozenset([state])
        spec = self.spec
        if stmt.op == ACQUIRE and spec.is_acquire(stmt.api):
            return frozenset([self._acquire(state, stmt.api, origin)])
        if stmt.op in (RELEASE, RELEASE_IF_HELD) and spec.is_release(stmt.api):
            return frozenset([self._release(state, stmt.api, stmt.op == RELEASE_IF_HELD, origin)])
        if stmt.op == USE and self.track_uses and stmt.target in self.refs and not state.held:
            return frozenset([SimState(state.held, USE_AFTER_RELEASE, state.trace + (origin,))])
        if stmt.op == CALL and stmt.callee in self.app.procedures and stmt.callee not in active:
            return self.run_procedure(stmt.callee, state, active | {stmt.callee})
        return frozenset([state])

    def run_procedure(self, name: str, state: SimState, active: FrozenSet[str]) -> FrozenSet[SimState]:
        """States at the end of every bounded run of a procedure"""
        key = (name, state, active)
        if key in self._memo:
            return self._memo[key]
        proc = self.app.procedures[name]
        ends: Set[SimState] = set()
        visits: Counter = Counter()

        def walk(block_id: str, states: FrozenSet[SimState]):
            if visits[block_id] >= self.loop_bound:
                return
            visits[block_id] += 1
            block = proc.blocks[block_id]
            returned = False
            for index, stmt in enumerate(block.statements):
                if stmt.op == RETURN:
                    returned = True
                    break
                states = frozenset(
                    after for s in states for after in self._step(stmt, (name, block_id, index), s, active)
                )
            if returned or not block.successors:
                self.explored += len(states)
                if self.explored > self.budget:
                    raise BudgetExceeded(
                        f"More than {self.budget} runs explored in '{self.app.name}'", entity=self.app.name,
                    )
                ends.update(states)
            else:
                for succ in block.successors:
                    walk(succ, states)
            visits[block_id] -= 1

        walk(proc.entry, frozenset([state]))
        result = frozenset(ends)
        self._memo[key] = result
        return result

    def run_sequence(self, component: Component, sequence: Sequence[str]) -> FrozenSet[SimState]:
        """States at the end of every run of a callback sequence"""
        states = frozenset([SimState()])
        for callback in sequence:
            if callback not in component.callbacks:
                continue
            proc = component.callbacks[callback]
            states = frozenset(
                after for s in states for after in self.run_procedure(proc, s, frozenset([proc]))
            )
            if not states:
                break
        return states


def oracle_leaks(
    app: AppModel,
    spec: ResourceSpec,
    depth: int,
    loop_bound: Optional[int] = None,
    release_policy: str = "early",
    budget: Optional[int] = None,
) -> List[Tuple[str, Origin]]:
    """
    Acquire sites still pending at the end of some bounded run

    Args:
        app: Application model
        spec: Resource list
        depth: Unrolling depth D >= 1
        loop_bound: Block executions per procedure invocation (default PLUMB_LOOP_BOUND)
        release_policy: "early" or "late" choice of the release callback
        budget: Cap on explored runs (default PLUMB_ORACLE_BUDGET)

    Returns:
        Sorted (component, acquire origin) pairs

    Raises:
        BudgetExceeded: if enumeration goes over the budget
    """
    sim = Simulator(app, spec, loop_bound or get_loop_bound(), budget or get_oracle_budget())
    leaks = set()
    for component in app.components:
        lifecycle = resolve_lifecycle(component.lifecycle, app.lifecycles)
        target = policy_target(component, spec, lifecycle, release_policy)
        if target is None:
            continue
        for sequence in callback_sequences(lifecycle, [target], depth):
            for state in sim.run_sequence(component, sequence):
                leaks.update((component.name, origin) for origin in state.pending())
    logger.debug(f"Oracle explored {sim.explored} run(s) of '{app.name}': {len(leaks)} leak(s)")
    return sorted(leaks)


def oracle_violations(
    app: AppModel,
    spec: ResourceSpec,
    depth: int,
    loop_bound: Optional[int] = None,
    release_policy: str = "early",
    budget: Optional[int] = None,
) -> List[Tuple[str, str]]:
    """
    First safety violations of bounded runs

    Use-after-release and double release are collected on sequences towards
    each release callback in turn; runs towards the policy's release callback that
    end without a violation but with something pending are new leaks.

    Returns:
        Sorted (component, violation kind) pairs

    Raises:
        BudgetExceeded: if enumeration goes over the budget
    """
    sim = Simulator(app, spec, loop_bound or get_loop_bound(), budget or get_oracle_budget(), track_uses=True)
    found = set()
    for component in app.components:
        lifecycle = resolve_lifecycle(component.lifecycle, app.lifecycles)
        targets = release_targets(spec, lifecycle)
        if not targets:
            continue
        sequences = sorted({s for t in targets for s in callback_sequences(lifecycle, [t], depth)})
        for sequence in sequences:
            for state in sim.run_sequence(component, sequence):
                if state.violation is not None:
                    found.add((component.name, state.violation))
        target = policy_target(component, spec, lifecycle, release_policy)
        for sequence in callback_sequences(lifecycle, [target], depth):
            for state in sim.run_sequence(component, sequence):
                if state.violation is None and state.held:
                    found.add((component.name, NEW_LEAK))
    logger.debug(f"Oracle explored {sim.explored} run(s) of '{app.name}': {len(found)} violation(s)")
    return sorted(found)
