"""
Emptiness checking with shortest witnesses

Pushdown emptiness is solved by a demand-driven tabulation in the style of
Knuth's generalization of Dijkstra's algorithm. A frame is entered when a
move pushes a new stack symbol and is identified by its entry
configuration (state, top). Three kinds of facts are derived with their
minimal cost, the word read ordered by length and then symbol by symbol
(an epsilon move reads nothing):

- PE(entry, config): config is reachable from entry without popping below it
- SUM(entry, state): the frame entered at entry can pop into state
- REACH(entry): entry is reachable from the initial configuration

A word is accepted iff some reachable configuration has a final state.
"""
import heapq
import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

from shared.automata.fsa import FiniteAutomaton, sort_key
from shared.automata.pda import BOTTOM, PushdownAutomaton

logger = logging.getLogger(__name__)

Config = Tuple[object, object]
Cost = Tuple[int, Tuple[str, ...]]

ZERO: Cost = (0, ())


def _then(cost: Cost, symbol: Optional[str]) -> Cost:
    if symbol is None:
        return cost
    return cost[0] + 1, cost[1] + (symbol,)


def _join(first: Cost, second: Cost) -> Cost:
    return first[0] + second[0], first[1] + second[1]


@dataclass(frozen=True)
class Witness:
    """
    Accepted word with the settled state after each prefix

    provenance holds, when known, the RFG node that read each symbol.
    """
    symbols: Tuple[str, ...]
    states: Tuple[object, ...]
    provenance: Tuple = field(default=(), compare=False)

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        return " ".join(self.symbols)

    def with_provenance(self, nodes: Sequence) -> "Witness":
        return replace(self, provenance=tuple(nodes))


def _states_from_steps(initial, steps: List[Tuple[Optional[str], object]]) -> Tuple[Tuple[str, ...], Tuple]:
    symbols: List[str] = []
    states = [initial]
    for symbol, state in steps:
        if symbol is None:
            states[-1] = state
        else:
            symbols.append(symbol)
            states.append(state)
    return tuple(symbols), tuple(states)


def _fsa_emptiness(a: FiniteAutomaton) -> Optional[Witness]:
    dist: Dict[object, Cost] = {}
    parent: Dict[object, Optional[Tuple[object, Optional[str]]]] = {}
    heap = []
    counter = itertools.count()
    for state in sorted(a.initial, key=sort_key):
        dist[state] = ZERO
        parent[state] = None
        heap.append((ZERO, sort_key(state), next(counter), state))
    heapq.heapify(heap)
    goal = None
    settled = set()
    while heap:
        cost, _, _, state = heapq.heappop(heap)
        if state in settled:
            continue
        settled.add(state)
        if state in a.final:
            goal = state
            break
        for symbol, target in a.outgoing(state):
            step = _then(cost, symbol)
            if target not in dist or step < dist[target]:
                dist[target] = step
                parent[target] = (state, symbol)
                heapq.heappush(heap, (step, sort_key(target), next(counter), target))
    if goal is None:
        return None
    steps = []
    current = goal
    while parent[current] is not None:
        previous, symbol = parent[current]
        steps.append((symbol, current))
        current = previous
    steps.reverse()
    symbols, states = _states_from_steps(current, steps)
    return Witness(symbols, states)


class _Tabulation:
    def __init__(self, pda: PushdownAutomaton):
        self.pda = pda
        self.pe: Dict[Tuple[Config, Config], Cost] = {}
        self.pe_deriv: Dict[Tuple[Config, Config], Tuple] = {}
        self.sums: Dict[Tuple[Config, object], Cost] = {}
        self.sum_deriv: Dict[Tuple[Config, object], Tuple] = {}
        self.done = set()
        self.demanded = set()
        # entry -> [(caller entry, caller config, symbol, symbol below, cost so far)]
        self.callers: Dict[Config, List[Tuple]] = {}
        # entry -> [(return state, cost)] in pop order
        self.returns: Dict[Config, List[Tuple[object, Cost]]] = {}
        self.heap: List = []
        self.counter = itertools.count()

    def _relax(self, kind: str, key: Tuple, cost: Cost, deriv: Tuple):
        table, derivs = (self.pe, self.pe_deriv) if kind == "pe" else (self.sums, self.sum_deriv)
        if key in table and table[key] <= cost:
            return
        table[key] = cost
        derivs[key] = deriv
        heapq.heappush(self.heap, (cost, next(self.counter), kind, key))

    def _demand(self, entry: Config):
        if entry not in self.demanded:
            self.demanded.add(entry)
            self._relax("pe", (entry, entry), ZERO, ("axiom",))

    def run(self, start: Config):
        self._demand(start)
        while self.heap:
            cost, _, kind, key = heapq.heappop(self.heap)
            table = self.pe if kind == "pe" else self.sums
            if (kind, key) in self.done or table[key] != cost:
                continue
            self.done.add((kind, key))
            if kind == "pe":
                self._expand(key, cost)
            else:
                self._returned(key, cost)

    def _expand(self, key: Tuple[Config, Config], cost: Cost):
        entry, config = key
        state, top = config
        for symbol, target, push in self.pda.moves_from(state, top):
            step = _then(cost, symbol)
            if not push:
                self._relax("sum", (entry, target), step, (config, symbol))
            elif len(push) == 1:
                self._relax("pe", (entry, (target, push[0])), step, ("step", config, symbol))
            else:
                callee = (target, push[0])
                below = push[1]
                self.callers.setdefault(callee, []).append((entry, config, symbol, below, step))
                self._demand(callee)
                for ret, ret_cost in self.returns.get(callee, []):
                    self._relax(
                        "pe", (entry, (ret, below)), _join(step, ret_cost),
                        ("call", config, symbol, callee, ret),
                    )

    def _returned(self, key: Tuple[Config, object], cost: Cost):
        callee, ret = key
        self.returns.setdefault(callee, []).append((ret, cost))
        for entry, config, symbol, below, step in self.callers.get(callee, []):
            self._relax(
                "pe", (entry, (ret, below)), _join(step, cost),
                ("call", config, symbol, callee, ret),
            )

    def reach(self, start: Config) -> Tuple[Dict[Config, Cost], Dict[Config, Tuple]]:
        """Cheapest way into every frame, from the callers table"""
        links_from: Dict[Config, List[Tuple]] = {}
        for callee, links in self.callers.items():
            for caller, config, symbol, _, step in links:
                links_from.setdefault(caller, []).append((callee, config, symbol, step))
        dist = {start: ZERO}
        parent: Dict[Config, Tuple] = {start: None}
        heap = [(ZERO, sort_key(start), start)]
        done = set()
        while heap:
            cost, _, entry = heapq.heappop(heap)
            if entry in done:
                continue
            done.add(entry)
            for callee, config, symbol, step in links_from.get(entry, []):
                total = _join(cost, step)
                if callee not in dist or total < dist[callee]:
                    dist[callee] = total
                    parent[callee] = (entry, config, symbol)
                    heapq.heappush(heap, (total, sort_key(callee), callee))
        return dist, parent

    def steps_to(self, entry: Config, config: Config, reach_parent: Dict) -> List[Tuple[Optional[str], object]]:
        """Moves from the initial configuration to config inside frame entry"""
        chain = []
        current = entry
        while reach_parent[current] is not None:
            caller, caller_config, symbol = reach_parent[current]
            chain.append((caller, caller_config, symbol, current))
            current = caller
        chain.reverse()

        out: List[Tuple[Optional[str], object]] = []
        tasks: List[Tuple] = [("pe", entry, config)]
        for caller, caller_config, symbol, callee in reversed(chain):
            tasks.append(("emit", symbol, callee[0]))
            tasks.append(("pe", caller, caller_config))
        while tasks:
            task = tasks.pop()
            if task[0] == "emit":
                out.append((task[1], task[2]))
            elif task[0] == "pe":
                _, frame, current_config = task
                deriv = self.pe_deriv[(frame, current_config)]
                if deriv[0] == "step":
                    _, previous, symbol = deriv
                    tasks.append(("emit", symbol, current_config[0]))
                    tasks.append(("pe", frame, previous))
                elif deriv[0] == "call":
                    _, previous, symbol, callee, ret = deriv
                    tasks.append(("sum", callee, ret))
                    tasks.append(("emit", symbol, callee[0]))
                    tasks.append(("pe", frame, previous))
            else:
                _, frame, ret = task
                last_config, symbol = self.sum_deriv[(frame, ret)]
                tasks.append(("emit", symbol, ret))
                tasks.append(("pe", frame, last_config))
        return out


def _pda_emptiness(a: PushdownAutomaton) -> Optional[Witness]:
    start = (a.initial, BOTTOM)
    table = _Tabulation(a)
    table.run(start)
    dist, parent = table.reach(start)

    best = None
    for (entry, config), cost in table.pe.items():
        if config[0] not in a.final or entry not in dist:
            continue
        candidate = (_join(dist[entry], cost), sort_key(entry), sort_key(config))
        if best is None or candidate < best[0]:
            best = (candidate, entry, config)
    logger.debug(
        f"Emptiness of {a!r}: {len(table.pe)} path facts, {len(table.sums)} summaries, "
        f"{len(table.demanded)} frames"
    )
    if best is None:
        return None
    _, entry, config = best
    steps = table.steps_to(entry, config, parent)
    symbols, states = _states_from_steps(a.initial, steps)
    return Witness(symbols, states)


def emptiness(a: Union[PushdownAutomaton, FiniteAutomaton]) -> Optional[Witness]:
    """
    Decide whether an automaton accepts nothing

    Args:
        a: Pushdown automaton, or finite automaton as the stack-free case

    Returns:
        None when the language is empty, otherwise a shortest accepted
        Witness. Among equally short words the lexicographically smallest
        symbol sequence wins.
    """
    if isinstance(a, FiniteAutomaton):
        return _fsa_emptiness(a)
    return _pda_emptiness(a)


def is_empty(a: Union[PushdownAutomaton, FiniteAutomaton]) -> bool:
    return emptiness(a) is None
