"""
Pipeline service - request documents in, result documents out
"""
import json
import logging
from typing import Any, Dict, Iterable, List, Optional, Tuple

import pandas as pd

from shared.analysis import analyze_app
from shared.config import get_depth, get_release_policy, get_validate_default
from shared.errors import ValidationError
from shared.ir import AppModel, ResourceSpec, load_bundled, parse_app, parse_resource_spec
from shared.oracle import depth_fixtures
from shared.repair import repair
from shared.rfg import stats_document
from shared.validators import validate_request_body

logger = logging.getLogger(__name__)


def _as_text(document: Any) -> str:
    return document if isinstance(document, str) else json.dumps(document, ensure_ascii=False)


def load_inputs(body: Dict[str, Any]) -> Tuple[AppModel, ResourceSpec]:
    """
    Parse the app and resource of a request body

    Raises:
        ValidationError: if the body is malformed
        SchemaError: if a document does not parse
    """
    ok, msg = validate_request_body(body)
    if not ok:
        raise ValidationError(msg, entity="request")
    app = parse_app(_as_text(body["app"]))
    if body.get("resource") is not None:
        spec = parse_resource_spec(_as_text(body["resource"]))
    else:
        spec = load_bundled(body["resource_name"])
    return app, spec


def run_options(body: Dict[str, Any]) -> Tuple[int, str]:
    """Depth and release policy of a request, environment defaults otherwise"""
    depth = body.get("depth") or get_depth()
    release = body.get("release") or get_release_policy()
    return depth, release


def run_analyze(body: Dict[str, Any]) -> Dict[str, Any]:
    app, spec = load_inputs(body)
    depth, release = run_options(body)
    result = analyze_app(app, spec, depth, release)
    logger.info(f"analyze '{app.name}' for {spec.name}: {len(result.reports)} leak(s)")
    return {"app": app.name, "resource": spec.name, "depth": depth, "release": release, **result.to_dict()}


def run_fix(body: Dict[str, Any]) -> Dict[str, Any]:
    app, spec = load_inputs(body)
    depth, release = run_options(body)
    validate_flag = body["validate"] if body.get("validate") is not None else get_validate_default()
    result = repair(app, spec, depth, validate_flag, release)
    logger.info(f"fix '{app.name}' for {spec.name}: {len(result.fixes)} fix(es), all valid: {result.all_valid}")
    bundle = result.to_bundle()
    bundle["all_valid"] = result.all_valid
    return bundle


def run_stats(body: Dict[str, Any]) -> Dict[str, Any]:
    app, spec = load_inputs(body)
    return stats_document(app, spec)


def depth_profile(spec: ResourceSpec, depths: Iterable[int], apps: Optional[List[AppModel]] = None) -> pd.DataFrame:
    """
    Leaks found per app and unrolling depth

    Args:
        spec: Reentrant resource list
        depths: Depths to analyze at
        apps: Apps to analyze (default: the depth fixtures of the resource)

    Returns:
        DataFrame with columns app, depth, leaks
    """
    apps = depth_fixtures(spec) if apps is None else apps
    rows = [
        {"app": app.name, "depth": depth, "leaks": len(analyze_app(app, spec, depth).reports)}
        for app in apps
        for depth in depths
    ]
    return pd.DataFrame(rows, columns=["app", "depth", "leaks"])
