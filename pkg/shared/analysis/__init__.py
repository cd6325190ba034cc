"""
Leak detection: intra-procedural, inter-procedural and over unrolled lifecycles
"""
from .intra import blamed_origin, leak_automaton, leaking_paths, leaking_paths_by_origin, may_leak
from .inter import Summary, all_calls, call_dag, resolve_calls
from .callbacks import choose_release_callback, invoked_release_callbacks, unroll_callbacks, unroll_lifecycle
from .engine import AnalysisResult, LeakReport, analyze, analyze_app, origin_to_dict, sequence_graph

__all__ = [
    'blamed_origin', 'leak_automaton', 'leaking_paths', 'leaking_paths_by_origin', 'may_leak',
    'Summary', 'all_calls', 'call_dag', 'resolve_calls',
    'choose_release_callback', 'invoked_release_callbacks', 'unroll_callbacks', 'unroll_lifecycle',
    'AnalysisResult', 'LeakReport', 'analyze', 'analyze_app', 'origin_to_dict', 'sequence_graph',
]
