"""
Finite and pushdown automata for leak detection and validation
"""
from .fsa import FINISH, START, FiniteAutomaton
from .pda import BOTTOM, PushdownAutomaton
from .resource import (
    DETECTION,
    DOUBLE_RELEASE,
    NEW_LEAK,
    STRICT,
    USE_AFTER_RELEASE,
    USE_SYMBOL,
    VIOLATION_KINDS,
    blame_automaton,
    guarded,
    marked,
    resource_alphabet,
    resource_automaton,
    violation_automaton,
)
from .operations import complement, complete, flow_automaton, frame_automaton, intersect, node_symbol, node_trace
from .emptiness import Witness, emptiness, is_empty
from .dot import automaton_to_dot

__all__ = [
    'FINISH', 'START', 'FiniteAutomaton', 'BOTTOM', 'PushdownAutomaton',
    'DETECTION', 'DOUBLE_RELEASE', 'NEW_LEAK', 'STRICT', 'USE_AFTER_RELEASE', 'USE_SYMBOL', 'VIOLATION_KINDS',
    'blame_automaton', 'guarded', 'marked', 'resource_alphabet', 'resource_automaton', 'violation_automaton',
    'complement', 'complete', 'flow_automaton', 'frame_automaton', 'intersect', 'node_symbol', 'node_trace',
    'Witness', 'emptiness', 'is_empty',
    'automaton_to_dot',
]
