"""
Validation utilities
"""
from .validators import (
    validate_required_fields,
    validate_identifier,
    validate_string_list,
    validate_statement,
    validate_operation_name,
    validate_request_body,
)

__all__ = [
    'validate_required_fields',
    'validate_identifier',
    'validate_string_list',
    'validate_statement',
    'validate_operation_name',
    'validate_request_body',
]
