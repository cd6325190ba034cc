import azure.functions as func
import logging
import os
import sys
import traceback
from datetime import datetime, timezone

logger = logging.getLogger(__name__)

_import_errors = []
try:
    from shared.function_bootstrap import get_response_fns, maybe_attach_import_errors, safe_import
except Exception:
    sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    from shared.function_bootstrap import get_response_fns, maybe_attach_import_errors, safe_import

responses = get_response_fns(logger=logger, errors=_import_errors)
_, _ir = safe_import("shared.ir", ["list_bundled", "load_bundled"], logger=logger, errors=_import_errors,
                     label="analysis engine")
_, _config = safe_import(
    "shared.config",
    ["get_depth", "get_release_policy", "get_validate_default"],
    logger=logger,
    errors=_import_errors,
    label="configuration",
)

SERVICE = "plumbline"
VERSION = "1.0.0"


def _respond(payload, status_code: int) -> func.HttpResponse:
    response = responses.json_response(payload, status_code)
    response.headers["Cache-Control"] = "no-cache"
    return response


def _check_resources():
    """Names of the bundled specs that load, and the failures of those that don't"""
    loaded, broken = [], []
    for name in _ir["list_bundled"]():
        try:
            _ir["load_bundled"](name)
            loaded.append(name)
        except Exception as spec_error:
            logger.error(f"Bundled resource '{name}' does not load: {spec_error}")
            broken.append({"resource": name, "error": str(spec_error)})
    return loaded, broken


def main(req: func.HttpRequest) -> func.HttpResponse:
    """
    GET /api/health
    Service status with the bundled resource specs and active settings
    """
    logger.info(f"health endpoint called, method: {req.method}")
    payload = {
        "status": "healthy",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "service": SERVICE,
        "version": VERSION,
        "checks": {"api": {"status": "ok", "message": "API is running"}},
    }
    try:
        if not _ir or not _config:
            payload["status"] = "degraded"
            payload["checks"]["engine"] = {"status": "error", "message": "Analysis engine not available - import failed"}
            return _respond(maybe_attach_import_errors(payload, _import_errors), 503)

        payload["checks"]["engine"] = {"status": "ok", "message": "Analysis engine loaded"}
        payload["settings"] = {
            "depth": _config["get_depth"](),
            "release_policy": _config["get_release_policy"](),
            "validate": _config["get_validate_default"](),
        }
        loaded, broken = _check_resources()
        payload["resources"] = loaded
        status_code = 200
        if broken:
            payload["status"] = "degraded"
            payload["checks"]["resources"] = {"status": "error", "failed": broken}
            status_code = 503
        else:
            payload["checks"]["resources"] = {"status": "ok", "count": len(loaded)}

        logger.info(f"Health check: {payload['status']} ({len(loaded)} resource specs)")
        return _respond(payload, status_code)
    except Exception as e:
        logger.error(f"Critical error in health check endpoint: {e}")
        logger.error(f"Traceback: {traceback.format_exc()}")
        return responses.error_response("Health check endpoint encountered an unexpected error", 500, str(e))
