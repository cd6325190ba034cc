import azure.functions as func
import logging
import os
import sys

logger = logging.getLogger(__name__)

try:
    from shared.function_bootstrap import pipeline_endpoint
except Exception:
    sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    from shared.function_bootstrap import pipeline_endpoint

_handle = pipeline_endpoint(__file__, "run_fix", "Repair service", "fix app", logger)


def main(req: func.HttpRequest) -> func.HttpResponse:
    """
    POST /api/fix
    Fix leaks of one resource and return the patch bundle
    """
    return _handle(req)
