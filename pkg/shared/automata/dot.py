"""
DOT rendering of automata
"""
from typing import Union

from graphviz import Digraph, escape

from shared.automata.fsa import FiniteAutomaton, sort_key
from shared.automata.pda import PushdownAutomaton


def _edge_labels(a: Union[FiniteAutomaton, PushdownAutomaton]):
    if isinstance(a, FiniteAutomaton):
        for source, symbol, target in a.transitions():
            yield source, target, symbol or "ε"
        return
    for (source, symbol, top), (target, push) in a.transitions():
        pushed = "".join(str(g) for g in push) or "ε"
        yield source, target, f"{symbol or 'ε'}, {top}/{pushed}"


def automaton_to_dot(a: Union[FiniteAutomaton, PushdownAutomaton]) -> str:
    dot = Digraph(a.name or "automaton")
    dot.attr(rankdir="TB")
    states = sorted(a.states, key=sort_key)
    ids = {state: f"q{i}" for i, state in enumerate(states)}
    initial = a.initial if isinstance(a, FiniteAutomaton) else {a.initial}
    for state in states:
        dot.node(
            ids[state],
            label=escape(sort_key(state)),
            shape="doublecircle" if state in a.final else "circle",
            style="bold" if state in initial else None,
        )
    edges = sorted((ids[s], ids[t], label) for s, t, label in _edge_labels(a))
    for source, target, label in edges:
        dot.edge(source, target, label=escape(label))
    return dot.source
