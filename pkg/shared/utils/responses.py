"""
JSON HTTP responses for the function endpoints
"""
import json
from typing import Any, Dict, Optional

import azure.functions as func

from shared.errors import PlumbError

_CORS = {"Access-Control-Allow-Origin": "*"}


def json_response(data: Any, status_code: int = 200) -> func.HttpResponse:
    """
    Serialize `data` as the JSON body of a response

    Args:
        data: JSON-compatible document
        status_code: HTTP status code

    Returns:
        HTTP response with CORS open to every origin
    """
    return func.HttpResponse(
        json.dumps(data, ensure_ascii=False),
        status_code=status_code,
        mimetype="application/json",
        headers=dict(_CORS),
    )


def error_response(error: str, status_code: int = 400, details: Optional[Any] = None) -> func.HttpResponse:
    """{"error": ..., "details": ...}; details are omitted when empty"""
    payload: Dict[str, Any] = {"error": error}
    if details:
        payload["details"] = details
    return json_response(payload, status_code)


def plumb_error_response(error: PlumbError, status_code: int = 400) -> func.HttpResponse:
    """Error response naming the exception type and the offending entity"""
    details = {"type": type(error).__name__}
    if error.entity is not None:
        details["entity"] = error.entity
    return error_response(str(error), status_code, details)


def success_response(data: Dict[str, Any], status_code: int = 200) -> func.HttpResponse:
    return json_response(data, status_code)
