"""
General utility functions and HTTP responses
"""
import logging

logger = logging.getLogger(__name__)

# Helpers have no third-party dependencies and are used by the core packages
from .helpers import to_json

# Responses need azure-functions; the analysis core and the CLI run without it
_responses_available = False
try:
    from .responses import (
        error_response,
        json_response,
        plumb_error_response,
        success_response,
    )
    _responses_available = True
except ImportError as e:
    logger.warning(f"HTTP response helpers unavailable (azure-functions missing?): {e}")

    def _unavailable(*args, **kwargs):
        raise ImportError("azure.functions not available. Install azure-functions to build HTTP responses.")

    json_response = error_response = success_response = plumb_error_response = _unavailable

__all__ = [
    # Helpers (always available)
    'to_json',
    # Responses (need azure-functions)
    'json_response',
    'error_response',
    'success_response',
    'plumb_error_response',
]
