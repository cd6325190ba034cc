"""
Resource automata built from resource lists

Three families share one input alphabet convention:

- resource_automaton: the leak-free sequences of a resource. In "strict"
  mode every release must match the pending acquire; in "detection" mode a
  release of nothing is a no-op and re-acquiring a held non-reentrant
  resource is idempotent, so the complement accepts exactly the framed
  sequences ending with a pending acquire.
- blame_automaton: framed sequences that end while an instance acquired by
  a marked acquire symbol is still pending.
- violation_automaton: framed sequences whose first safety violation is of
  a given kind (use after release, double release, new leak).
"""
import logging
from collections import deque
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Tuple

from shared.automata.fsa import FINISH, START, FiniteAutomaton
from shared.automata.pda import BOTTOM, PushdownAutomaton
from shared.errors import SpecError
from shared.ir.model import ResourceSpec

logger = logging.getLogger(__name__)

USE_SYMBOL = "use"
GUARD_PREFIX = "?"
MARK_PREFIX = "*"

STRICT = "strict"
DETECTION = "detection"
MODES = (STRICT, DETECTION)

USE_AFTER_RELEASE = "UseAfterRelease"
DOUBLE_RELEASE = "DoubleRelease"
NEW_LEAK = "NewLeak"
VIOLATION_KINDS = (USE_AFTER_RELEASE, DOUBLE_RELEASE, NEW_LEAK)

_INIT = "init"
_MAIN = "main"
_END = "end"


def guarded(op: str) -> str:
    return f"{GUARD_PREFIX}{op}"


def marked(op: str) -> str:
    return f"{MARK_PREFIX}{op}"


def plain(symbol: str) -> str:
    """Operation named by a (possibly guarded or marked) symbol"""
    return symbol.lstrip(GUARD_PREFIX + MARK_PREFIX)


def resource_alphabet(
    spec: ResourceSpec,
    guards: bool = True,
    uses: bool = False,
    marks: bool = False,
) -> FrozenSet[str]:
    """
    Input alphabet over a resource's operations

    Args:
        spec: Resource list
        guards: Include guarded releases ("?r")
        uses: Include the "use" symbol
        marks: Include marked acquires ("*a")
    """
    symbols = {START, FINISH, *spec.acquire_ops, *spec.release_ops}
    if guards:
        symbols.update(guarded(r) for r in spec.release_ops)
    if uses:
        symbols.add(USE_SYMBOL)
    if marks:
        symbols.update(marked(a) for a in spec.acquire_ops)
    return frozenset(symbols)


def _check_spec(spec: ResourceSpec):
    if not spec.pairs:
        raise SpecError(f"Resource '{spec.name}' has no acquire/release pairs", entity=spec.name)
    for release in spec.release_ops:
        if not any(spec.matches(a, release) for a in spec.acquire_ops):
            raise SpecError(f"Release '{release}' of '{spec.name}' matches no acquire", entity=release)
    reserved = {START, FINISH, USE_SYMBOL}
    for op in (*spec.acquire_ops, *spec.release_ops):
        if op in reserved or op.startswith((GUARD_PREFIX, MARK_PREFIX)):
            raise SpecError(f"Operation '{op}' of '{spec.name}' collides with a reserved symbol", entity=op)


def _explore(
    alphabet: FrozenSet[str],
    initial,
    step: Callable[[object, str], Optional[object]],
    final: Callable[[object], bool],
    name: str,
) -> FiniteAutomaton:
    """Build a DFA from a step function over its reachable states"""
    states = {initial}
    transitions = []
    queue = deque([initial])
    symbols = sorted(alphabet)
    while queue:
        state = queue.popleft()
        for symbol in symbols:
            target = step(state, symbol)
            if target is None:
                continue
            transitions.append((state, symbol, target))
            if target not in states:
                states.add(target)
                queue.append(target)
    return FiniteAutomaton(alphabet, states, [initial], [s for s in states if final(s)], transitions, name)


def _released(spec: ResourceSpec, held: FrozenSet[str], release: str) -> FrozenSet[str]:
    return frozenset(a for a in held if not spec.matches(a, release))


# -- leak-free language ----------------------------------------------------

def _strict_fsa(spec: ResourceSpec) -> FiniteAutomaton:
    alphabet = resource_alphabet(spec, guards=False)

    def step(state, symbol):
        if state == _INIT:
            return _MAIN if symbol == START else None
        if state == _MAIN:
            if symbol == FINISH:
                return _END
            if spec.is_acquire(symbol):
                return ("held", symbol)
            return None
        if isinstance(state, tuple) and spec.matches(state[1], symbol):
            return _MAIN
        return None

    return _explore(alphabet, _INIT, step, lambda s: s == _END, f"{spec.name}:strict")


def _detection_fsa(spec: ResourceSpec) -> FiniteAutomaton:
    alphabet = resource_alphabet(spec)

    def step(state, symbol):
        if state == _INIT:
            return frozenset() if symbol == START else None
        if state == _END:
            return None
        if symbol == FINISH:
            return _END if not state else None
        if spec.is_acquire(symbol):
            return state | {symbol}
        if spec.is_release(plain(symbol)):
            return _released(spec, state, plain(symbol))
        return None

    return _explore(alphabet, _INIT, step, lambda s: s == _END, f"{spec.name}:detection")


def _stack_symbols(spec: ResourceSpec) -> List:
    return [BOTTOM, *spec.acquire_ops]


def _strict_pda(spec: ResourceSpec) -> PushdownAutomaton:
    alphabet = resource_alphabet(spec, guards=False)
    gamma = _stack_symbols(spec)
    delta = {(_INIT, START, BOTTOM): (_MAIN, (BOTTOM,)), (_MAIN, FINISH, BOTTOM): (_END, (BOTTOM,))}
    for top in gamma:
        for a in spec.acquire_ops:
            delta[(_MAIN, a, top)] = (_MAIN, (a, top))
        for r in spec.release_ops:
            if top != BOTTOM and spec.matches(top, r):
                delta[(_MAIN, r, top)] = (_MAIN, ())
    return PushdownAutomaton(alphabet, [_INIT, _MAIN, _END], _INIT, [_END], gamma, delta, f"{spec.name}:strict")


def _drain_state(release: str) -> Tuple[str, str]:
    return ("drain", release)


def _add_guarded_drains(spec: ResourceSpec, delta: Dict, gamma: Iterable, main=_MAIN, top_op=lambda g: g):
    """Guarded release pops every matching acquire on top of the stack"""
    for r in spec.release_ops:
        drain = _drain_state(r)
        for top in gamma:
            delta[(main, guarded(r), top)] = (drain, (top,))
            op = None if top == BOTTOM else top_op(top)
            if op is not None and spec.matches(op, r):
                delta[(drain, None, top)] = (drain, ())
            else:
                delta[(drain, None, top)] = (main, (top,))


def _detection_pda(spec: ResourceSpec) -> PushdownAutomaton:
    alphabet = resource_alphabet(spec)
    gamma = _stack_symbols(spec)
    delta = {(_INIT, START, BOTTOM): (_MAIN, (BOTTOM,)), (_MAIN, FINISH, BOTTOM): (_END, (BOTTOM,))}
    for top in gamma:
        for a in spec.acquire_ops:
            delta[(_MAIN, a, top)] = (_MAIN, (a, top))
        for r in spec.release_ops:
            matched = top != BOTTOM and spec.matches(top, r)
            delta[(_MAIN, r, top)] = (_MAIN, () if matched else (top,))
    _add_guarded_drains(spec, delta, gamma)
    states = [_INIT, _MAIN, _END, *(_drain_state(r) for r in spec.release_ops)]
    return PushdownAutomaton(alphabet, states, _INIT, [_END], gamma, delta, f"{spec.name}:detection")


def resource_automaton(spec: ResourceSpec, mode: str = STRICT):
    """
    Automaton accepting the leak-free framed sequences of a resource

    Args:
        spec: Resource list
        mode: "strict" (every release matches the pending acquire) or
            "detection" (tolerant releases, guarded releases, idempotent
            non-reentrant re-acquire)

    Returns:
        PushdownAutomaton for reentrant resources, FiniteAutomaton otherwise

    Raises:
        SpecError: if the resource list cannot define an automaton
    """
    if mode not in MODES:
        raise ValueError(f"Unknown resource automaton mode '{mode}'")
    _check_spec(spec)
    if spec.reentrant:
        return _strict_pda(spec) if mode == STRICT else _detection_pda(spec)
    return _strict_fsa(spec) if mode == STRICT else _detection_fsa(spec)


# -- blame -----------------------------------------------------------------

def blame_automaton(spec: ResourceSpec):
    """
    Automaton accepting framed sequences that end while an instance
    acquired through a marked symbol ("*a") is pending

    Non-reentrant states track (held ops, ops held by a marked acquire);
    re-acquiring a held op keeps its first holder. Reentrant stack entries
    are (op, flag) where flag records a marked instance at or below.
    """
    _check_spec(spec)
    alphabet = resource_alphabet(spec, marks=True)
    if not spec.reentrant:
        def step(state, symbol):
            if state == _INIT:
                return (frozenset(), frozenset()) if symbol == START else None
            if state == _END:
                return None
            held, mine = state
            if symbol == FINISH:
                return _END if mine else None
            op = plain(symbol)
            if spec.is_acquire(op):
                if op in held:
                    return state
                return held | {op}, (mine | {op}) if symbol.startswith(MARK_PREFIX) else mine
            if spec.is_release(op):
                return _released(spec, held, op), _released(spec, mine, op)
            return None

        return _explore(alphabet, _INIT, step, lambda s: s == _END, f"{spec.name}:blame")

    gamma = [BOTTOM] + [(a, flag) for a in spec.acquire_ops for flag in (False, True)]
    delta = {(_INIT, START, BOTTOM): (_MAIN, (BOTTOM,))}
    for top in gamma:
        below_marked = top != BOTTOM and top[1]
        for a in spec.acquire_ops:
            delta[(_MAIN, a, top)] = (_MAIN, ((a, below_marked), top))
            delta[(_MAIN, marked(a), top)] = (_MAIN, ((a, True), top))
        for r in spec.release_ops:
            matched = top != BOTTOM and spec.matches(top[0], r)
            delta[(_MAIN, r, top)] = (_MAIN, () if matched else (top,))
        if below_marked:
            delta[(_MAIN, FINISH, top)] = (_END, (top,))
    _add_guarded_drains(spec, delta, gamma, top_op=lambda g: g[0])
    states = [_INIT, _MAIN, _END, *(_drain_state(r) for r in spec.release_ops)]
    return PushdownAutomaton(alphabet, states, _INIT, [_END], gamma, delta, f"{spec.name}:blame")


# -- validation ------------------------------------------------------------

def _violated(kind: str) -> Tuple[str, str]:
    return ("violated", kind)


def _ended(kind: str) -> Tuple[str, str]:
    return ("ended", kind)


def violation_automaton(spec: ResourceSpec, kind: str):
    """
    Automaton accepting framed sequences whose first violation is `kind`

    Violations: "use" with nothing pending (UseAfterRelease); an unguarded
    release with no matching pending acquire (DoubleRelease); anything
    pending at f (NewLeak). Guarded releases never violate.
    """
    if kind not in VIOLATION_KINDS:
        raise ValueError(f"Unknown violation kind '{kind}'")
    _check_spec(spec)
    alphabet = resource_alphabet(spec, uses=True)
    body = sorted(alphabet - {START, FINISH})

    if not spec.reentrant:
        def step(state, symbol):
            if state == _INIT:
                return frozenset() if symbol == START else None
            if isinstance(state, tuple):
                if state[0] == "ended" or symbol == START:
                    return None
                return _ended(state[1]) if symbol == FINISH else state
            if state == _END:
                return None
            if symbol == FINISH:
                return _END if not state else _ended(NEW_LEAK)
            if symbol == USE_SYMBOL:
                return state if state else _violated(USE_AFTER_RELEASE)
            if spec.is_acquire(symbol):
                return state | {symbol}
            op = plain(symbol)
            if spec.is_release(op):
                remaining = _released(spec, state, op)
                if remaining == state and not symbol.startswith(GUARD_PREFIX):
                    return _violated(DOUBLE_RELEASE)
                return remaining
            return None

        return _explore(alphabet, _INIT, step, lambda s: s == _ended(kind), f"{spec.name}:{kind}")

    gamma = _stack_symbols(spec)
    delta = {(_INIT, START, BOTTOM): (_MAIN, (BOTTOM,))}
    for top in gamma:
        keep = (top,)
        delta[(_MAIN, FINISH, top)] = (_END if top == BOTTOM else _ended(NEW_LEAK), keep)
        delta[(_MAIN, USE_SYMBOL, top)] = (_violated(USE_AFTER_RELEASE) if top == BOTTOM else _MAIN, keep)
        for a in spec.acquire_ops:
            delta[(_MAIN, a, top)] = (_MAIN, (a, top))
        for r in spec.release_ops:
            if top != BOTTOM and spec.matches(top, r):
                delta[(_MAIN, r, top)] = (_MAIN, ())
            else:
                delta[(_MAIN, r, top)] = (_violated(DOUBLE_RELEASE), keep)
        for k in (USE_AFTER_RELEASE, DOUBLE_RELEASE):
            for symbol in body:
                delta[(_violated(k), symbol, top)] = (_violated(k), keep)
            delta[(_violated(k), FINISH, top)] = (_ended(k), keep)
    _add_guarded_drains(spec, delta, gamma)
    states = [
        _INIT, _MAIN, _END,
        *(_drain_state(r) for r in spec.release_ops),
        *(_violated(k) for k in (USE_AFTER_RELEASE, DOUBLE_RELEASE)),
        *(_ended(k) for k in VIOLATION_KINDS),
    ]
    return PushdownAutomaton(alphabet, states, _INIT, [_ended(kind)], gamma, delta, f"{spec.name}:{kind}")
