"""
Text renderings of leak reports, fixes and IR changes
"""
import difflib
from typing import Iterable, List

from shared.analysis.engine import LeakReport
from shared.ir.model import AppModel, Procedure
from shared.repair.pipeline import RepairResult


def procedure_lines(proc: Procedure) -> List[str]:
    lines = [f"procedure {proc.name} (entry {proc.entry})"]
    for block in proc.blocks.values():
        successors = f" -> {', '.join(block.successors)}" if block.successors else ""
        lines.append(f"  {block.id}:{successors}")
        lines.extend(f"    {index}: {stmt}" for index, stmt in enumerate(block.statements))
    return lines


def app_lines(app: AppModel) -> List[str]:
    lines = [f"app {app.name}"]
    for comp in app.components:
        bound = ", ".join(f"{cb}={proc}" for cb, proc in comp.callbacks.items())
        fields = f" fields [{', '.join(comp.fields)}]" if comp.fields else ""
        lines.append(f"component {comp.name} ({comp.lifecycle}){fields}: {bound}")
    for proc in app.procedures.values():
        lines.extend(procedure_lines(proc))
    return lines


def unified_diff(original: AppModel, patched: AppModel, context: int = 2) -> str:
    """Unified diff of the readable IR listings of two apps"""
    diff = difflib.unified_diff(
        app_lines(original),
        app_lines(patched),
        fromfile=f"{original.name} (original)",
        tofile=f"{patched.name} (patched)",
        n=context,
        lineterm="",
    )
    return "\n".join(diff)


def render_reports(reports: Iterable[LeakReport]) -> str:
    reports = list(reports)
    if not reports:
        return "No leaks found."
    lines = [f"{len(reports)} leak(s) found:"]
    lines.extend(f"- {r.describe()}" for r in reports)
    return "\n".join(lines)


def render_repair(result: RepairResult) -> str:
    if not result.fixes and not result.errors:
        return "No leaks found; app unchanged."
    lines = [f"{len(result.fixes)} fix(es):"]
    for fix in result.fixes:
        validation = result.validation_of(fix)
        verdict = ""
        if validation is not None:
            kinds = f": {', '.join(validation.kinds())}" if validation.kinds() else ""
            verdict = f" [{validation.verdict}{kinds}]"
        lines.append(f"- {fix.describe()}{verdict}")
    for error in result.errors:
        lines.append(f"! {error['type']}: {error['message']}")
    for report in result.residual:
        lines.append(f"? residual: {report.describe()}")
    diff = unified_diff(result.original, result.patched)
    if diff:
        lines.extend(["", diff])
    return "\n".join(lines)
