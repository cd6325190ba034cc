import azure.functions as func
import base64
import logging
import os
import sys
import traceback
from io import BytesIO

logger = logging.getLogger(__name__)

_import_errors = []
try:
    from shared.function_bootstrap import (
        ensure_app_root_on_syspath,
        get_response_fns,
        maybe_attach_import_errors,
        safe_import,
        unavailable_response,
    )
except Exception:
    sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    from shared.function_bootstrap import (
        ensure_app_root_on_syspath,
        get_response_fns,
        maybe_attach_import_errors,
        safe_import,
        unavailable_response,
    )

ensure_app_root_on_syspath(__file__, logger=logger)
responses = get_response_fns(logger=logger, errors=_import_errors)

_, _service_attrs = safe_import("shared.services", ["depth_profile"], logger=logger, errors=_import_errors,
                                label="pipeline service")
_, _engine_attrs = safe_import("shared.ir", ["load_bundled"], logger=logger, errors=_import_errors,
                               label="resource specs")
_, _corpus_attrs = safe_import("shared.oracle", ["generate_corpus"], logger=logger, errors=_import_errors,
                               label="corpus generator")
_, _stats_attrs = safe_import("shared.rfg", ["app_stats"], logger=logger, errors=_import_errors, label="stats")
_, _error_attrs = safe_import("shared.errors", ["PlumbError"], logger=logger, errors=_import_errors)

depth_profile = _service_attrs.get("depth_profile")
load_bundled = _engine_attrs.get("load_bundled")
generate_corpus = _corpus_attrs.get("generate_corpus")
app_stats = _stats_attrs.get("app_stats")
PlumbError = _error_attrs.get("PlumbError", ValueError)

MAX_DEPTH = 6
MAX_CORPUS = 50


def _plotting():
    """
    Import pandas and matplotlib on first use (Agg backend, seaborn style if installed)

    Returns:
        (pandas module, pyplot module)
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import pandas as pd

    try:
        import seaborn as sns
        sns.set_style("whitegrid")
    except ImportError:
        logger.debug("seaborn not installed, using matplotlib defaults")
    plt.rcParams.update({"figure.figsize": (10, 6), "font.size": 10})
    return pd, plt


def _png_data_url(fig, plt) -> str:
    buffer = BytesIO()
    fig.savefig(buffer, format="png", dpi=100, bbox_inches="tight")
    plt.close(fig)
    return "data:image/png;base64," + base64.b64encode(buffer.getvalue()).decode("ascii")


def _int_param(req: func.HttpRequest, name: str, default: int, maximum: int) -> int:
    value = int(req.params.get(name, default))
    if not 1 <= value <= maximum:
        raise ValueError(f"'{name}' must be between 1 and {maximum}")
    return value


def chart_depth(req: func.HttpRequest, pd, plt) -> func.HttpResponse:
    """
    GET /api/visualization/depth?resource=WakeLock&max_depth=6
    Leaks found on the depth fixtures per unrolling depth
    """
    max_depth = _int_param(req, "max_depth", MAX_DEPTH, MAX_DEPTH)
    spec = load_bundled(req.params.get("resource", "WakeLock"))
    if not spec.reentrant:
        return responses.error_response(f"Depth fixtures need a reentrant resource, '{spec.name}' is not", 400)

    df = depth_profile(spec, range(1, max_depth + 1))
    table = df.pivot(index="depth", columns="app", values="leaks")

    fig, ax = plt.subplots()
    table.plot(ax=ax, marker="o", linewidth=2)
    ax.set_title(f"{spec.name} leaks found per unrolling depth", fontsize=14, fontweight="bold")
    ax.set_xlabel("Unrolling depth D")
    ax.set_ylabel("Leaks reported")
    ax.set_xticks(list(table.index))
    ax.legend(loc="lower right")

    totals = df.groupby("depth")["leaks"].sum()
    return responses.success_response({
        "chart": _png_data_url(fig, plt),
        "resource": spec.name,
        "data": {str(depth): int(count) for depth, count in totals.items()},
    }, 200)


def chart_complexity(req: func.HttpRequest, pd, plt) -> func.HttpResponse:
    """
    GET /api/visualization/complexity?resource=MediaPlayer&seed=0&count=20
    M(CFG) against M(RFG) over a seeded random corpus
    """
    count = _int_param(req, "count", 20, MAX_CORPUS)
    seed = int(req.params.get("seed", 0))
    spec = load_bundled(req.params.get("resource", "MediaPlayer"))

    # last row of app_stats is the whole-app total
    df = pd.DataFrame([app_stats(app, spec).iloc[-1] for app in generate_corpus(seed, count, spec)])

    fig, ax = plt.subplots()
    ax.scatter(df["cfg_m"], df["rfg_m"], color="#667eea", alpha=0.8)
    upper = max(int(df["cfg_m"].max()), 1)
    ax.plot([0, upper], [0, upper], linestyle="--", color="#764ba2", linewidth=1)
    ax.set_title(f"Cyclomatic complexity, {spec.name} abstraction", fontsize=14, fontweight="bold")
    ax.set_xlabel("M(CFG)")
    ax.set_ylabel("M(RFG)")

    return responses.success_response({
        "chart": _png_data_url(fig, plt),
        "resource": spec.name,
        "statistics": {
            "apps": len(df),
            "mean_ratio": float(df["ratio"].mean()),
            "max_ratio": float(df["ratio"].max()),
        },
    }, 200)


CHARTS = {"depth": chart_depth, "complexity": chart_complexity}


def main(req: func.HttpRequest) -> func.HttpResponse:
    """
    GET /api/visualization/{chart_type}
    Charts over the depth fixtures and seeded corpora
    """
    chart_type = req.route_params.get("chart_type", "")
    logger.info(f"visualization endpoint called, chart: {chart_type}")
    chart = CHARTS.get(chart_type)
    if chart is None:
        return responses.error_response(
            f"Invalid chart type '{chart_type}'", 400, f"Available chart types: {', '.join(CHARTS)}",
        )
    if _import_errors:
        return unavailable_response("Visualization service", _import_errors)
    try:
        pd, plt = _plotting()
    except Exception as lib_error:
        payload = maybe_attach_import_errors(
            {"error": "Visualization dependencies unavailable", "details": str(lib_error)}, _import_errors,
        )
        return responses.json_response(payload, 503)

    try:
        return chart(req, pd, plt)
    except PlumbError as e:
        return responses.plumb_error_response(e, 400)
    except ValueError as ve:
        logger.error(f"Invalid query parameter: {ve}")
        return responses.error_response("Invalid query parameter", 400, str(ve))
    except Exception as e:
        logger.error(f"Error generating {chart_type} chart: {e}")
        logger.error(f"Traceback: {traceback.format_exc()}")
        return responses.error_response(f"Failed to generate {chart_type} chart", 500, str(e))
