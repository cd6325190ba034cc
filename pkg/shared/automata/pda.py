"""
Deterministic pushdown automata
"""
from typing import Dict, FrozenSet, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple

from shared.automata.fsa import FiniteAutomaton, State, sort_key
from shared.errors import NotDeterministic

# Empty-stack symbol, never popped
BOTTOM = "⊥"

StackSymbol = Hashable
# (state, symbol or None for epsilon, stack top) -> (state, replacement, top first)
PdaKey = Tuple[State, Optional[str], StackSymbol]
PdaMove = Tuple[State, Tuple[StackSymbol, ...]]

# Runs with more consecutive epsilon moves are treated as diverging
_EPSILON_LIMIT = 10_000


class PushdownAutomaton:
    """
    Deterministic pushdown automaton accepting by final state

    A transition (q, a, g) -> (q', w) replaces the stack top g by w, whose
    first element becomes the new top; |w| <= 2. States with epsilon moves
    ("epsilon states") move on epsilon for every stack top, read no input
    and are never final, so a final state always denotes a stable
    configuration.
    """

    def __init__(
        self,
        alphabet: Iterable[str],
        states: Iterable[State],
        initial: State,
        final: Iterable[State],
        stack_alphabet: Iterable[StackSymbol],
        transitions: Dict[PdaKey, PdaMove],
        name: str = "",
    ):
        self.alphabet: FrozenSet[str] = frozenset(alphabet)
        self.states: FrozenSet[State] = frozenset(states)
        self.initial = initial
        self.final: FrozenSet[State] = frozenset(final)
        self.stack_alphabet: FrozenSet[StackSymbol] = frozenset(stack_alphabet) | {BOTTOM}
        self.name = name
        self._delta: Dict[PdaKey, PdaMove] = dict(transitions)
        self._check()
        self._by_config: Optional[Dict[Tuple[State, StackSymbol], List[Tuple[Optional[str], State, Tuple]]]] = None

    def _check(self):
        if self.initial not in self.states or not self.final <= self.states:
            raise ValueError("Initial and final states must be states")
        epsilon_states = set()
        reading_states = set()
        for (state, symbol, top), (target, push) in self._delta.items():
            if state not in self.states or target not in self.states:
                raise ValueError(f"Transition {state!r} -> {target!r} leaves the state set")
            if symbol is not None and symbol not in self.alphabet:
                raise ValueError(f"Symbol '{symbol}' is not in the alphabet")
            if top not in self.stack_alphabet or any(g not in self.stack_alphabet for g in push):
                raise ValueError(f"Transition {state!r} uses an unknown stack symbol")
            if len(push) > 2:
                raise ValueError("Transitions replace the stack top by at most two symbols")
            if top == BOTTOM and (not push or push[-1] != BOTTOM or BOTTOM in push[:-1]):
                raise ValueError("The empty-stack symbol must stay at the bottom")
            if top != BOTTOM and BOTTOM in push:
                raise ValueError("The empty-stack symbol cannot be pushed")
            (epsilon_states if symbol is None else reading_states).add(state)
        mixed = epsilon_states & reading_states
        if mixed:
            raise NotDeterministic(f"State {sort_key(sorted(mixed, key=sort_key)[0])} reads input and moves on epsilon")
        for state in epsilon_states:
            if state in self.final:
                raise ValueError(f"Epsilon state {state!r} cannot be final")
            for top in self.stack_alphabet:
                if (state, None, top) not in self._delta:
                    raise ValueError(f"Epsilon state {state!r} has no move for stack top {top!r}")
        self.epsilon_states: FrozenSet[State] = frozenset(epsilon_states)

    def __repr__(self):
        return f"PushdownAutomaton({self.name!r}, |Q|={len(self.states)}, |delta|={len(self._delta)})"

    @property
    def deterministic(self) -> bool:
        # a dict keyed by (state, symbol, top) is functional by construction
        return True

    def transitions(self) -> Iterator[Tuple[PdaKey, PdaMove]]:
        return iter(self._delta.items())

    def move(self, state: State, symbol: Optional[str], top: StackSymbol) -> Optional[PdaMove]:
        return self._delta.get((state, symbol, top))

    def moves_from(self, state: State, top: StackSymbol) -> List[Tuple[Optional[str], State, Tuple]]:
        """Moves applicable in configuration (state, top), epsilon first then by symbol"""
        if self._by_config is None:
            index: Dict[Tuple[State, StackSymbol], List[Tuple[Optional[str], State, Tuple]]] = {}
            for (q, symbol, g), (target, push) in self._delta.items():
                index.setdefault((q, g), []).append((symbol, target, push))
            for moves in index.values():
                moves.sort(key=lambda m: ("" if m[0] is None else "~" + m[0]))
            self._by_config = index
        return self._by_config.get((state, top), [])

    def _settle(self, state: State, stack: List[StackSymbol]) -> Optional[State]:
        steps = 0
        while state in self.epsilon_states:
            target, push = self._delta[(state, None, stack[-1])]
            stack.pop()
            stack.extend(reversed(push))
            state = target
            steps += 1
            if steps > _EPSILON_LIMIT:
                return None
        return state

    def run(self, word: Sequence[str]) -> Optional[Tuple[State, Tuple[StackSymbol, ...]]]:
        """
        Final configuration after reading word, None when the run blocks

        The stack is returned top first.
        """
        stack: List[StackSymbol] = [BOTTOM]
        state = self._settle(self.initial, stack)
        for symbol in word:
            if state is None:
                return None
            move = self._delta.get((state, symbol, stack[-1]))
            if move is None:
                return None
            target, push = move
            stack.pop()
            stack.extend(reversed(push))
            state = self._settle(target, stack)
        if state is None:
            return None
        return state, tuple(reversed(stack))

    def trace(self, word: Sequence[str]) -> Optional[List[State]]:
        """States after each prefix of word (settled), None when the run blocks"""
        states = []
        for i in range(len(word) + 1):
            config = self.run(word[:i])
            if config is None:
                return None
            states.append(config[0])
        return states

    def accepts(self, word: Sequence[str]) -> bool:
        config = self.run(word)
        return config is not None and config[0] in self.final

    @classmethod
    def from_fsa(cls, fsa: FiniteAutomaton) -> "PushdownAutomaton":
        """Stack-free PDA recognizing the language of a deterministic FSA"""
        if not fsa.deterministic:
            raise NotDeterministic(f"Automaton '{fsa.name}' is not deterministic")
        transitions = {
            (source, symbol, BOTTOM): (target, (BOTTOM,))
            for source, symbol, target in fsa.transitions()
        }
        return cls(fsa.alphabet, fsa.states, fsa.initial_state, fsa.final, [BOTTOM], transitions, fsa.name)
