"""
Repair workflow: analyze, synthesize and apply fixes, then validate
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from shared.analysis.engine import LeakReport, analyze_app
from shared.errors import CycleWarning, PlumbError
from shared.ir.model import AppModel, Origin, ResourceSpec
from shared.ir.parser import app_to_dict
from shared.repair.fixes import Fix, apply_fixes, check_fix, synthesize_fix
from shared.repair.validation import ValidationResult, validate

logger = logging.getLogger(__name__)


@dataclass
class RepairResult:
    """
    Outcome of repairing one resource in an app

    `validations` maps each fix key to the validation of its component in
    the fully patched app; it is empty when validation was skipped.
    """
    original: AppModel
    patched: AppModel
    fixes: List[Fix] = field(default_factory=list)
    validations: Dict[tuple, ValidationResult] = field(default_factory=dict)
    reports: List[LeakReport] = field(default_factory=list)
    residual: List[LeakReport] = field(default_factory=list)
    errors: List[dict] = field(default_factory=list)
    warnings: List[CycleWarning] = field(default_factory=list)

    def validation_of(self, fix: Fix) -> Optional[ValidationResult]:
        return self.validations.get(fix.key)

    @property
    def all_valid(self) -> bool:
        return all(v.valid for v in self.validations.values())

    def invalid_fixes(self) -> List[Fix]:
        return [f for f in self.fixes if f.key in self.validations and not self.validations[f.key].valid]

    def to_bundle(self) -> dict:
        """Patch bundle document; invalid fixes stay in it, flagged"""
        fixes = []
        for fix in self.fixes:
            entry = fix.to_dict()
            validation = self.validation_of(fix)
            entry["validation"] = validation.to_dict() if validation is not None else None
            fixes.append(entry)
        return {
            "fixes": fixes,
            "patched_app": app_to_dict(self.patched),
            "residual_leaks": [r.to_dict() for r in self.residual],
            "errors": self.errors,
            "warnings": [w.to_dict() for w in self.warnings],
        }


def repair(
    app: AppModel,
    spec: ResourceSpec,
    depth: int,
    validate_flag: bool = True,
    release_policy: str = "early",
    max_workers: Optional[int] = None,
) -> RepairResult:
    """
    Fix every leak of one resource in an app

    Args:
        app: Application model
        spec: Resource list
        depth: Unrolling depth D >= 1
        validate_flag: Validate the patched app
        release_policy: "early" or "late" choice of the release callback
        max_workers: Worker threads for the analysis

    Returns:
        RepairResult; a fix that cannot be synthesized or applied is
        recorded in `errors` and the remaining fixes are still applied
    """
    analysis = analyze_app(app, spec, depth, release_policy, max_workers)
    result = RepairResult(original=app, patched=app, reports=analysis.reports, warnings=analysis.warnings)

    fields: Dict[Origin, str] = {}
    fixes: Dict[tuple, Fix] = {}
    for report in analysis.reports:
        try:
            fix = synthesize_fix(report, app, spec, fields)
            check_fix(app, fix)
        except PlumbError as e:
            logger.error(f"Could not fix {report.describe()}: {e}", exc_info=True)
            result.errors.append({"leak": report.to_dict(), "type": type(e).__name__, "message": str(e)})
            continue
        fixes.setdefault(fix.key, fix)
    result.fixes = list(fixes.values())
    if not result.fixes:
        return result

    result.patched = apply_fixes(app, result.fixes)
    result.residual = analyze_app(result.patched, spec, depth, release_policy, max_workers).reports
    if result.residual:
        logger.warning(f"{len(result.residual)} leak(s) of {spec.name} remain in the patched '{app.name}'")

    if validate_flag:
        validation = validate(result.patched, spec, depth, release_policy)
        result.validations = {fix.key: validation.for_component(fix.component) for fix in result.fixes}
        invalid = result.invalid_fixes()
        if invalid:
            logger.warning(f"{len(invalid)} of {len(result.fixes)} fix(es) failed validation")
    return result
