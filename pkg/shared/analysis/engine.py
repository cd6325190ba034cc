"""
App-level leak analysis: unrolled callback sequences over procedure summaries
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from shared.analysis.callbacks import CallbackSequence, choose_release_callback, unroll_callbacks
from shared.analysis.inter import Summary, all_calls, call_dag
from shared.analysis.intra import leaking_paths_by_origin
from shared.automata import Witness
from shared.automata.resource import plain
from shared.config import get_max_workers
from shared.errors import CycleWarning, NoReleaseCallback
from shared.ir.lifecycles import resolve_lifecycle
from shared.ir.model import AppModel, Component, Origin, ResourceSpec
from shared.rfg.graph import ResourceFlowGraph, chain

logger = logging.getLogger(__name__)


def origin_to_dict(origin: Optional[Origin]) -> Optional[dict]:
    if origin is None:
        return None
    procedure, block, index = origin
    return {"procedure": procedure, "block": block, "index": index}


@dataclass(frozen=True)
class LeakReport:
    """
    One leaking acquire site of a component

    The witness reads the blamed acquire as a marked symbol and carries
    the RFG node that read each symbol as provenance.
    """
    resource: str
    component: str
    callback_sequence: CallbackSequence
    witness: Witness
    release_callback: str
    origin: Origin

    @property
    def key(self) -> Tuple[str, Origin, str]:
        return self.component, self.origin, self.release_callback

    def trace(self) -> List[Optional[Origin]]:
        return [node.origin for node in self.witness.provenance]

    def to_dict(self) -> dict:
        return {
            "resource": self.resource,
            "component": self.component,
            "callback_sequence": list(self.callback_sequence),
            "release_callback": self.release_callback,
            "acquire": origin_to_dict(self.origin),
            "witness": [plain(s) for s in self.witness.symbols],
            "trace": [origin_to_dict(o) for o in self.trace()],
        }

    def describe(self) -> str:
        procedure, block, index = self.origin
        return (
            f"{self.resource} acquired at {procedure}/{block}[{index}] in {self.component} "
            f"is not released by {self.release_callback}: "
            f"{' '.join(plain(s) for s in self.witness.symbols)} "
            f"(callbacks: {', '.join(self.callback_sequence)})"
        )


@dataclass
class AnalysisResult:
    reports: List[LeakReport]
    warnings: List[CycleWarning] = field(default_factory=list)
    sequences: int = 0

    def to_dict(self) -> dict:
        return {
            "leaks": [r.to_dict() for r in self.reports],
            "warnings": [w.to_dict() for w in self.warnings],
            "sequences_analyzed": self.sequences,
        }


def sequence_graph(
    app: AppModel,
    component: Component,
    sequence: Sequence[str],
    summaries: Dict[str, Summary],
    name: str,
) -> ResourceFlowGraph:
    """Concatenated flow graphs of the implemented callbacks of a sequence"""
    parts = [
        summaries[component.callbacks[callback]].flow_graph
        for callback in sequence
        if callback in component.callbacks
    ]
    return chain(parts, name=name)


def _analyze_sequence(app, component, spec, sequence, index, summaries, release_callback) -> List[LeakReport]:
    graph = sequence_graph(app, component, sequence, summaries, f"{component.name}#{index}")
    found = leaking_paths_by_origin(graph, spec)
    return [
        LeakReport(
            resource=spec.name,
            component=component.name,
            callback_sequence=tuple(sequence),
            witness=witness,
            release_callback=release_callback,
            origin=origin,
        )
        for origin, witness in found.items()
    ]


def analyze_app(
    app: AppModel,
    spec: ResourceSpec,
    depth: int,
    release_policy: str = "early",
    max_workers: Optional[int] = None,
) -> AnalysisResult:
    """
    Detect leaks of one resource in every component of an app

    Args:
        app: Application model
        spec: Resource list
        depth: Unrolling depth D >= 1
        release_policy: "early" or "late" choice of the release callback
        max_workers: Worker threads for per-sequence analysis
            (default PLUMB_MAX_WORKERS)

    Returns:
        AnalysisResult with reports deduplicated by
        (component, acquire origin, release callback), ordered by
        component, callback sequence and origin
    """
    if depth < 1:
        raise ValueError("Unrolling depth must be at least 1")
    dag, cycle_warnings = call_dag(app)
    summaries = all_calls(app, spec, dag=dag)
    workers = max_workers or get_max_workers()

    jobs = []
    for component in sorted(app.components, key=lambda c: c.name):
        lifecycle = resolve_lifecycle(component.lifecycle, app.lifecycles)
        try:
            release_callback = choose_release_callback(component, spec, lifecycle, release_policy)
        except NoReleaseCallback as e:
            logger.warning(f"Skipping component '{component.name}': {e}")
            continue
        sequences = unroll_callbacks(component, spec, depth, app.lifecycles, targets=[release_callback])
        for index, sequence in enumerate(sequences):
            jobs.append((app, component, spec, sequence, index, summaries, release_callback))

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(lambda job: _analyze_sequence(*job), jobs))
    else:
        batches = [_analyze_sequence(*job) for job in jobs]

    best: Dict[Tuple, LeakReport] = {}
    for report in (r for batch in batches for r in batch):
        current = best.get(report.key)
        rank = (len(report.callback_sequence), report.callback_sequence)
        if current is None or rank < (len(current.callback_sequence), current.callback_sequence):
            best[report.key] = report
    reports = sorted(best.values(), key=lambda r: (r.component, r.callback_sequence, r.origin))
    logger.info(
        f"Analyzed '{app.name}' for {spec.name} at D={depth}: {len(jobs)} sequence(s), {len(reports)} leak(s)"
    )
    return AnalysisResult(reports, cycle_warnings, len(jobs))


def analyze(
    app: AppModel,
    spec: ResourceSpec,
    depth: int,
    release_policy: str = "early",
    max_workers: Optional[int] = None,
) -> List[LeakReport]:
    """Leak reports of analyze_app without the metadata"""
    return analyze_app(app, spec, depth, release_policy, max_workers).reports
