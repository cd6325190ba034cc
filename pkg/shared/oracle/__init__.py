"""
Brute-force reference semantics and test corpora
"""
from .simulator import (
    DOUBLE_RELEASE,
    NEW_LEAK,
    USE_AFTER_RELEASE,
    SimState,
    Simulator,
    callback_sequences,
    oracle_leaks,
    oracle_violations,
)
from .generator import CorpusConfig, DEPTH_FIXTURES, LOOPING, depth_fixture, depth_fixtures, generate_app, generate_corpus

__all__ = [
    'DOUBLE_RELEASE', 'NEW_LEAK', 'USE_AFTER_RELEASE', 'SimState', 'Simulator',
    'callback_sequences', 'oracle_leaks', 'oracle_violations',
    'CorpusConfig', 'DEPTH_FIXTURES', 'LOOPING', 'depth_fixture', 'depth_fixtures', 'generate_app', 'generate_corpus',
]
