"""
Startup helpers shared by the function entrypoints

A function module must import even when part of the engine does not: the
helpers here record import failures instead of raising, fall back to
plain JSON responses, and turn a failed import into a 503 at call time.
"""

from __future__ import annotations

import importlib
import json
import logging
import os
import sys
import traceback
from dataclasses import dataclass, fields
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import azure.functions as func

_DEBUG_FLAGS = ("DEBUG_IMPORT_ERRORS", "FUNC_DEBUG_IMPORT_ERRORS")


def ensure_app_root_on_syspath(current_file: str, logger: Optional[logging.Logger] = None) -> Optional[str]:
    """
    Put the app root (the folder above the function folder) first on sys.path

    Returns:
        The app root, or None if it could not be determined
    """
    try:
        app_root = os.path.dirname(os.path.dirname(os.path.abspath(current_file)))
    except Exception as e:
        if logger:
            logger.error(f"Cannot locate app root from {current_file}: {e}", exc_info=True)
        return None
    if app_root not in sys.path:
        sys.path.insert(0, app_root)
    return app_root


def _debug_import_errors_enabled() -> bool:
    return any(os.environ.get(flag, "").lower() in ("1", "true", "yes", "on") for flag in _DEBUG_FLAGS)


def fallback_json_response(data: Any, status_code: int = 200) -> func.HttpResponse:
    return func.HttpResponse(
        json.dumps(data, ensure_ascii=False),
        status_code=status_code,
        mimetype="application/json",
        headers={"Access-Control-Allow-Origin": "*"},
    )


def fallback_error_response(error: str, status_code: int = 400, details: Optional[Any] = None) -> func.HttpResponse:
    payload: Dict[str, Any] = {"error": error}
    if details:
        payload["details"] = details
    return fallback_json_response(payload, status_code)


def fallback_plumb_error_response(error: Exception, status_code: int = 400) -> func.HttpResponse:
    details = {"type": type(error).__name__, "entity": getattr(error, "entity", None)}
    return fallback_error_response(str(error), status_code, details)


def safe_import(
    module_path: str,
    attr_names: Optional[Iterable[str]] = None,
    *,
    logger: Optional[logging.Logger] = None,
    errors: Optional[List[str]] = None,
    label: Optional[str] = None,
) -> Tuple[Optional[Any], Dict[str, Any]]:
    """
    Import a module and some of its attributes, recording failures in `errors`

    Returns:
        (module, {name: attribute}); (None, {}) when the import or a lookup fails
    """
    try:
        module = importlib.import_module(module_path)
        return module, {name: getattr(module, name) for name in attr_names or ()}
    except Exception as e:
        msg = f"Failed to import {label or module_path}: {e}"
        if logger:
            logger.error(msg, exc_info=True)
        if errors is not None:
            errors.append(msg)
        return None, {}


@dataclass(frozen=True)
class ResponseFns:
    json_response: Callable[..., func.HttpResponse]
    error_response: Callable[..., func.HttpResponse]
    success_response: Callable[..., func.HttpResponse]
    plumb_error_response: Callable[..., func.HttpResponse]


_FALLBACKS = ResponseFns(
    json_response=fallback_json_response,
    error_response=fallback_error_response,
    success_response=fallback_json_response,
    plumb_error_response=fallback_plumb_error_response,
)


def get_response_fns(logger: Optional[logging.Logger] = None, errors: Optional[List[str]] = None) -> ResponseFns:
    """Response builders from shared.utils.responses, or the plain fallbacks"""
    _, attrs = safe_import(
        "shared.utils.responses",
        [f.name for f in fields(ResponseFns)],
        logger=logger,
        errors=errors,
        label="response utilities",
    )
    return ResponseFns(**attrs) if attrs else _FALLBACKS


def maybe_attach_import_errors(payload: Dict[str, Any], errors: List[str]) -> Dict[str, Any]:
    """Copy of `payload` with the import errors, when DEBUG_IMPORT_ERRORS is on"""
    if errors and _debug_import_errors_enabled():
        return {**payload, "import_errors": list(errors)}
    return payload


def unavailable_response(service: str, errors: List[str]) -> func.HttpResponse:
    payload = maybe_attach_import_errors({"error": f"{service} unavailable (import errors)"}, errors)
    return fallback_json_response(payload, status_code=503)


def read_json_body(req: func.HttpRequest) -> Tuple[Optional[Any], Optional[str]]:
    """
    Parse the request body as JSON

    Returns:
        (body, None) or (None, error message)
    """
    try:
        body = req.get_json()
    except ValueError:
        return None, "Request body must be valid JSON"
    if not body:
        return None, "Request body is required"
    return body, None


def pipeline_endpoint(
    current_file: str,
    service_fn: str,
    service: str,
    action: str,
    logger: logging.Logger,
) -> Callable[[func.HttpRequest], func.HttpResponse]:
    """
    Build the handler of a POST endpoint backed by one shared.services function

    Input errors (PlumbError) answer 400 with the offending entity; anything
    else answers 500 with the exception text.

    Args:
        current_file: __file__ of the function module
        service_fn: name of the shared.services function taking the request body
        service: human-readable service name for 503 responses
        action: what the endpoint does, for logs and 500 responses ("analyze app")
        logger: the function module's logger
    """
    ensure_app_root_on_syspath(current_file, logger=logger)
    import_errors: List[str] = []
    responses = get_response_fns(logger=logger, errors=import_errors)
    _, service_attrs = safe_import("shared.services", [service_fn], logger=logger, errors=import_errors,
                                   label="pipeline service")
    _, error_attrs = safe_import("shared.errors", ["PlumbError"], logger=logger, errors=import_errors)
    run = service_attrs.get(service_fn)
    input_error = error_attrs.get("PlumbError", ValueError)

    def handle(req: func.HttpRequest) -> func.HttpResponse:
        logger.info(f"{action} requested, method: {req.method}")
        if import_errors or run is None:
            return unavailable_response(service, import_errors)
        body, msg = read_json_body(req)
        if msg:
            return responses.error_response(msg, 400)
        try:
            return responses.success_response(run(body), 200)
        except input_error as e:
            logger.warning(f"Rejected {action} request: {e}")
            return responses.plumb_error_response(e, 400)
        except Exception as e:
            logger.error(f"Failed to {action}: {e}")
            logger.error(f"Traceback: {traceback.format_exc()}")
            return responses.error_response(f"Failed to {action}", 500, str(e))

    return handle
