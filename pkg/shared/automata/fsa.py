"""
Finite-state automata with optional epsilon moves
"""
from collections import deque
from typing import Any, Dict, FrozenSet, Hashable, Iterable, Iterator, List, Optional, Sequence, Set, Tuple

# Input symbols framing every analyzed sequence
START = "s"
FINISH = "f"

State = Hashable
# (source, symbol or None for epsilon, target)
Transition = Tuple[State, Optional[str], State]


def sort_key(value: Any) -> str:
    """Total order over heterogeneous state values"""
    if isinstance(value, frozenset):
        return "{" + ",".join(sorted(sort_key(v) for v in value)) + "}"
    node_id = getattr(value, "node_id", None)
    if node_id is not None:
        return node_id
    return repr(value)


class FiniteAutomaton:
    """
    Finite-state automaton (Sigma, Q, I, F, delta)

    Transitions with symbol None are epsilon moves. The automaton is
    deterministic when it has a single initial state, no epsilon moves and
    at most one successor per (state, symbol).
    """

    def __init__(
        self,
        alphabet: Iterable[str],
        states: Iterable[State],
        initial: Iterable[State],
        final: Iterable[State],
        transitions: Iterable[Transition],
        name: str = "",
    ):
        self.alphabet: FrozenSet[str] = frozenset(alphabet)
        self.states: FrozenSet[State] = frozenset(states)
        self.initial: FrozenSet[State] = frozenset(initial)
        self.final: FrozenSet[State] = frozenset(final)
        self.name = name
        self._delta: Dict[Tuple[State, Optional[str]], Set[State]] = {}
        for source, symbol, target in transitions:
            if source not in self.states or target not in self.states:
                raise ValueError(f"Transition {source!r} -{symbol}-> {target!r} leaves the state set")
            if symbol is not None and symbol not in self.alphabet:
                raise ValueError(f"Symbol '{symbol}' is not in the alphabet")
            self._delta.setdefault((source, symbol), set()).add(target)
        if not self.initial <= self.states or not self.final <= self.states:
            raise ValueError("Initial and final states must be states")
        # set by determinize(): the automaton this one was built from
        self.source: Optional["FiniteAutomaton"] = None

    def __repr__(self):
        return (
            f"FiniteAutomaton({self.name!r}, |Q|={len(self.states)}, "
            f"|delta|={sum(len(t) for t in self._delta.values())}, deterministic={self.deterministic})"
        )

    @property
    def deterministic(self) -> bool:
        if len(self.initial) != 1:
            return False
        return all(symbol is not None and len(targets) == 1 for (_, symbol), targets in self._delta.items())

    @property
    def initial_state(self) -> State:
        if len(self.initial) != 1:
            raise ValueError("Automaton has no single initial state")
        return next(iter(self.initial))

    def transitions(self) -> Iterator[Transition]:
        for (source, symbol), targets in self._delta.items():
            for target in targets:
                yield source, symbol, target

    def targets(self, state: State, symbol: Optional[str]) -> FrozenSet[State]:
        return frozenset(self._delta.get((state, symbol), ()))

    def delta(self, state: State, symbol: str) -> Optional[State]:
        """Successor of a deterministic automaton, None when undefined"""
        targets = self._delta.get((state, symbol))
        if not targets:
            return None
        return next(iter(targets))

    def outgoing(self, state: State) -> List[Tuple[Optional[str], State]]:
        """Moves out of a state, epsilon first then by symbol"""
        moves = []
        for symbol in [None] + sorted(self.alphabet):
            for target in sorted(self._delta.get((state, symbol), ()), key=sort_key):
                moves.append((symbol, target))
        return moves

    def epsilon_closure(self, states: Iterable[State]) -> FrozenSet[State]:
        closure = set(states)
        todo = list(closure)
        while todo:
            state = todo.pop()
            for target in self._delta.get((state, None), ()):
                if target not in closure:
                    closure.add(target)
                    todo.append(target)
        return frozenset(closure)

    def run(self, word: Sequence[str]) -> FrozenSet[State]:
        """States reachable after reading word"""
        current = self.epsilon_closure(self.initial)
        for symbol in word:
            step = set()
            for state in current:
                step.update(self._delta.get((state, symbol), ()))
            current = self.epsilon_closure(step)
            if not current:
                break
        return current

    def accepts(self, word: Sequence[str]) -> bool:
        return bool(self.run(word) & self.final)

    def determinize(self) -> "FiniteAutomaton":
        """
        Subset construction over the reachable part

        States of the result are frozensets of states of this automaton;
        the empty set is never created (missing moves stay undefined).
        """
        start = self.epsilon_closure(self.initial)
        states = {start}
        transitions: List[Transition] = []
        queue = deque([start])
        symbols = sorted(self.alphabet)
        while queue:
            subset = queue.popleft()
            for symbol in symbols:
                step = set()
                for state in subset:
                    step.update(self._delta.get((state, symbol), ()))
                if not step:
                    continue
                target = self.epsilon_closure(step)
                transitions.append((subset, symbol, target))
                if target not in states:
                    states.add(target)
                    queue.append(target)
        final = [s for s in states if s & self.final]
        dfa = FiniteAutomaton(self.alphabet, states, [start], final, transitions, name=self.name)
        dfa.source = self
        return dfa

    def with_alphabet(self, alphabet: Iterable[str]) -> "FiniteAutomaton":
        """Same automaton over a larger alphabet"""
        alphabet = frozenset(alphabet)
        if not self.alphabet <= alphabet:
            raise ValueError("Alphabet can only be widened")
        widened = FiniteAutomaton(alphabet, self.states, self.initial, self.final, self.transitions(), self.name)
        widened.source = self.source
        return widened
