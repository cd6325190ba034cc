"""
Fix synthesis, injection and validation
"""
from .fixes import (
    Fix,
    apply_fix,
    apply_fixes,
    check_fix,
    insertion_point,
    postdominator_chain,
    synthesize_fix,
    synthesize_fixes,
    touching_procedures,
)
from .validation import INVALID, VALID, ValidationResult, Violation, validate
from .pipeline import RepairResult, repair
from .render import render_repair, render_reports, unified_diff

__all__ = [
    'Fix', 'apply_fix', 'apply_fixes', 'check_fix', 'insertion_point', 'postdominator_chain',
    'synthesize_fix', 'synthesize_fixes', 'touching_procedures',
    'INVALID', 'VALID', 'ValidationResult', 'Violation', 'validate',
    'RepairResult', 'repair',
    'render_repair', 'render_reports', 'unified_diff',
]
