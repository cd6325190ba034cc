"""
Complement, flow automata and products
"""
import logging
from collections import deque
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

from shared.automata.fsa import FINISH, START, FiniteAutomaton, sort_key
from shared.automata.pda import PushdownAutomaton
from shared.automata.resource import USE_SYMBOL, guarded, marked
from shared.errors import AlphabetMismatch, NotDeterministic
from shared.ir.model import Origin
from shared.rfg.graph import ACQUIRE_NODE, ENTRY, EXIT, RELEASE_NODE, USE_NODE, ResourceFlowGraph, RfgNode

logger = logging.getLogger(__name__)

Automaton = Union[FiniteAutomaton, PushdownAutomaton]

_SINK = ("sink",)
# fresh accepting state of flow automata
FLOW_ACCEPT = "accept"


def frame_automaton(alphabet: Iterable[str]) -> FiniteAutomaton:
    """DFA for s (Sigma minus {s, f})* f"""
    alphabet = frozenset(alphabet) | {START, FINISH}
    body = sorted(alphabet - {START, FINISH})
    transitions = [("frame:0", START, "frame:1"), ("frame:1", FINISH, "frame:2")]
    transitions += [("frame:1", symbol, "frame:1") for symbol in body]
    return FiniteAutomaton(alphabet, ["frame:0", "frame:1", "frame:2"], ["frame:0"], ["frame:2"], transitions, "frame")


def _fsa_product(a: FiniteAutomaton, b: FiniteAutomaton, name: str) -> FiniteAutomaton:
    start = (a.initial_state, b.initial_state)
    states = {start}
    transitions = []
    queue = deque([start])
    symbols = sorted(a.alphabet)
    while queue:
        p, q = queue.popleft()
        for symbol in symbols:
            p2, q2 = a.delta(p, symbol), b.delta(q, symbol)
            if p2 is None or q2 is None:
                continue
            target = (p2, q2)
            transitions.append(((p, q), symbol, target))
            if target not in states:
                states.add(target)
                queue.append(target)
    final = [s for s in states if s[0] in a.final and s[1] in b.final]
    return FiniteAutomaton(a.alphabet, states, [start], final, transitions, name)


def complete(a: Automaton) -> Automaton:
    """Add a sink so that every reading configuration has a move for every symbol"""
    symbols = sorted(a.alphabet)
    if isinstance(a, FiniteAutomaton):
        if not a.deterministic:
            raise NotDeterministic(f"Automaton '{a.name}' is not deterministic")
        transitions = list(a.transitions())
        for state in list(a.states) + [_SINK]:
            for symbol in symbols:
                if state == _SINK or a.delta(state, symbol) is None:
                    transitions.append((state, symbol, _SINK))
        return FiniteAutomaton(a.alphabet, set(a.states) | {_SINK}, a.initial, a.final, transitions, a.name)

    delta = dict(a.transitions())
    for state in list(a.states) + [_SINK]:
        if state in a.epsilon_states:
            continue
        for top in a.stack_alphabet:
            for symbol in symbols:
                if state == _SINK or (state, symbol, top) not in delta:
                    delta[(state, symbol, top)] = (_SINK, (top,))
    return PushdownAutomaton(
        a.alphabet, set(a.states) | {_SINK}, a.initial, a.final, a.stack_alphabet, delta, a.name,
    )


def complement(a: Automaton) -> Automaton:
    """
    Automaton accepting the framed strings s.body.f that a rejects

    The input is completed with a sink, finality is flipped on reading
    states and the result is restricted to framed strings.

    Raises:
        NotDeterministic: if a is a nondeterministic finite automaton
    """
    if isinstance(a, FiniteAutomaton) and not a.deterministic:
        raise NotDeterministic(f"Automaton '{a.name}' is not deterministic")
    total = complete(a)
    name = f"not({a.name})"
    frame = frame_automaton(a.alphabet)
    if isinstance(total, FiniteAutomaton):
        flipped = FiniteAutomaton(
            total.alphabet, total.states, total.initial, total.states - total.final, total.transitions(), name,
        )
        return _fsa_product(flipped, frame, name)
    flipped = PushdownAutomaton(
        total.alphabet,
        total.states,
        total.initial,
        total.states - total.final - total.epsilon_states,
        total.stack_alphabet,
        dict(total.transitions()),
        name,
    )
    return intersect(flipped, frame)


def node_symbol(node: RfgNode, track_uses: bool = False, marked_origin: Optional[Origin] = None) -> Optional[str]:
    """Input symbol read when leaving an RFG node, None for neutral nodes"""
    if node.kind == ENTRY:
        return START
    if node.kind == ACQUIRE_NODE:
        if marked_origin is not None and node.origin == marked_origin:
            return marked(node.op)
        return node.op
    if node.kind == RELEASE_NODE:
        return guarded(node.op) if node.guarded else node.op
    if node.kind == USE_NODE and track_uses:
        return USE_SYMBOL
    return None


def flow_automaton(
    rfg: ResourceFlowGraph,
    alphabet: Optional[Iterable[str]] = None,
    track_uses: bool = False,
    marked_origin: Optional[Origin] = None,
) -> FiniteAutomaton:
    """
    Deterministic automaton accepting the operation sequences along the
    s-to-f paths of an RFG

    Each edge m -> n reads the symbol of m; f reads "f" into a fresh
    accepting state. Neutral nodes are epsilon moves. The epsilon-NFA is
    kept as the result's `source` for mapping witnesses back to nodes.

    Args:
        rfg: Resource-flow graph
        alphabet: Alphabet to build over (widened from the symbols used)
        track_uses: Read "use" at UseNodes (validation mode)
        marked_origin: Acquire whose symbol is read as marked ("*a")

    Raises:
        AlphabetMismatch: if the RFG uses symbols outside `alphabet`
    """
    accept = RfgNode(f"{rfg.name}/{FLOW_ACCEPT}", FLOW_ACCEPT)
    transitions = []
    used = {START, FINISH}
    for m, n in rfg.graph.edges:
        if m == rfg.exit:
            continue
        symbol = node_symbol(m, track_uses, marked_origin)
        if symbol is not None:
            used.add(symbol)
        transitions.append((m, symbol, n))
    transitions.append((rfg.exit, FINISH, accept))
    if alphabet is None:
        alphabet = used
    alphabet = frozenset(alphabet)
    missing = used - alphabet
    if missing:
        raise AlphabetMismatch(f"Flow graph '{rfg.name}' reads symbols outside the alphabet: {sorted(missing)}")
    nfa = FiniteAutomaton(
        alphabet, set(rfg.graph.nodes) | {accept}, [rfg.entry], [accept], transitions, f"flow({rfg.name})",
    )
    dfa = nfa.determinize()
    logger.debug(f"Flow automaton for '{rfg.name}': {len(nfa.states)} NFA states, {len(dfa.states)} DFA states")
    return dfa


def node_trace(flow: FiniteAutomaton, symbols: Iterable[str]) -> List[RfgNode]:
    """
    RFG nodes that read each symbol of a word accepted by a flow automaton

    Breadth-first search over (node, position) pairs of the underlying
    epsilon-NFA; the first path found in sorted order is returned.
    """
    nfa = flow.source or flow
    word = list(symbols)
    start = (nfa.initial_state, 0)
    parents: Dict[Tuple, Optional[Tuple]] = {start: None}
    queue = deque([start])
    goal = None
    while queue:
        state, index = queue.popleft()
        if index == len(word) and state in nfa.final:
            goal = (state, index)
            break
        for symbol, target in nfa.outgoing(state):
            if symbol is None:
                nxt = (target, index)
            elif index < len(word) and symbol == word[index]:
                nxt = (target, index + 1)
            else:
                continue
            if nxt not in parents:
                parents[nxt] = (state, index)
                queue.append(nxt)
    if goal is None:
        raise ValueError(f"Word {' '.join(word)!r} is not accepted by '{nfa.name}'")
    nodes: List[RfgNode] = []
    current = goal
    while parents[current] is not None:
        previous = parents[current]
        if previous[1] != current[1]:
            nodes.append(previous[0])
        current = previous
    nodes.reverse()
    return nodes


def intersect(c: Automaton, d: FiniteAutomaton) -> PushdownAutomaton:
    """
    Product of an automaton with a deterministic finite automaton

    States are pairs (c state, d state); moves synchronize on input
    symbols and manipulate the stack as c does. Epsilon moves of c leave
    the d component unchanged. Only the reachable part is built.

    Raises:
        AlphabetMismatch: if the alphabets differ
        NotDeterministic: if d (or a finite c) is not deterministic
    """
    if c.alphabet != d.alphabet:
        raise AlphabetMismatch(
            f"Cannot intersect '{c.name}' and '{d.name}': alphabets differ by "
            f"{sorted(c.alphabet ^ d.alphabet)}"
        )
    if not d.deterministic:
        raise NotDeterministic(f"Automaton '{d.name}' is not deterministic")
    if isinstance(c, FiniteAutomaton):
        c = PushdownAutomaton.from_fsa(c)

    by_state: Dict[object, List] = {}
    for (state, symbol, top), (target, push) in c.transitions():
        by_state.setdefault(state, []).append((symbol, top, target, push))
    for moves in by_state.values():
        moves.sort(key=lambda m: ("" if m[0] is None else m[0], sort_key(m[1])))

    start = (c.initial, d.initial_state)
    states = {start}
    delta = {}
    queue = deque([start])
    while queue:
        p, q = queue.popleft()
        for symbol, top, target_p, push in by_state.get(p, ()):
            if symbol is None:
                target_q = q
            else:
                target_q = d.delta(q, symbol)
                if target_q is None:
                    continue
            target = (target_p, target_q)
            delta[((p, q), symbol, top)] = (target, push)
            if target not in states:
                states.add(target)
                queue.append(target)
    final = [s for s in states if s[0] in c.final and s[1] in d.final]
    product = PushdownAutomaton(c.alphabet, states, start, final, c.stack_alphabet, delta, f"{c.name}x{d.name}")
    logger.debug(f"Intersection {product!r}")
    return product
