"""
Service layer between HTTP functions and the analysis pipeline
"""
from .pipeline_service import (
    load_inputs,
    run_options,
    run_analyze,
    run_fix,
    run_stats,
    depth_profile,
)

__all__ = [
    'load_inputs',
    'run_options',
    'run_analyze',
    'run_fix',
    'run_stats',
    'depth_profile',
]
