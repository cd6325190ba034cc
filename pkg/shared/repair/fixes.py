"""
Fix synthesis and injection

A fix inserts one guarded release of the leaked resource into the
component's release callback. Synthesis works on the original app and
records every location in its coordinates; apply_fixes performs all
insertions of a batch at once, per block in descending index order.
"""
import logging
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import networkx as nx

from shared.analysis.engine import LeakReport, origin_to_dict
from shared.errors import NoReleaseCallbackImplemented, StaleFix
from shared.ir.model import (
    ACQUIRE,
    CALL,
    OTHER,
    RELEASE,
    RELEASE_IF_HELD,
    RETURN,
    USE,
    AppModel,
    BasicBlock,
    Component,
    Origin,
    Procedure,
    ResourceSpec,
    Statement,
)
from shared.rfg.builder import ALIAS_API, tracked_refs

logger = logging.getLogger(__name__)

SYNTHESIZED_BLOCK = "b0"
_EXIT = "<exit>"


@dataclass(frozen=True)
class Fix:
    """
    One guarded release to insert

    `location` is the insertion point in the procedure that receives the
    release. For fixes that bind a synthesized procedure to the callback,
    `synthesized_procedure` names it and `wraps` the callback procedure it
    calls first (None when the component did not implement the callback).
    """
    resource: str
    release_op: str
    target_ref: Optional[str]
    location: Origin
    guarded: Optional[str]
    introduces_field: Optional[str]
    component: str
    callback: str
    origin: Origin
    acquire_target: Optional[str] = None
    synthesized_procedure: Optional[str] = None
    wraps: Optional[str] = None

    @property
    def key(self) -> Tuple[Origin, str, Optional[str]]:
        return self.location, self.release_op, self.target_ref

    @property
    def statement(self) -> Statement:
        return Statement(RELEASE_IF_HELD, api=self.release_op, target=self.target_ref)

    def to_dict(self) -> dict:
        return {
            "resource": self.resource,
            "component": self.component,
            "callback": self.callback,
            "location": origin_to_dict(self.location),
            "release_op": self.release_op,
            "target_ref": self.target_ref,
            "guarded": self.guarded,
            "introduces_field": self.introduces_field,
            "acquire": origin_to_dict(self.origin),
            "synthesized_procedure": self.synthesized_procedure,
            "wraps": self.wraps,
        }

    def describe(self) -> str:
        procedure, block, index = self.location
        guard = f" && {self.guarded}()" if self.guarded else ""
        ref = self.target_ref or "<resource>"
        text = f"{procedure}/{block}[{index}]: if ({ref} != null{guard}) {ref}.{self.release_op}()"
        if self.introduces_field:
            text += f" [field {self.introduces_field} bound at {self.origin[0]}/{self.origin[1]}[{self.origin[2]}]]"
        if self.synthesized_procedure:
            text += f" [{self.synthesized_procedure} bound to {self.callback}]"
        return text


def synthesized_name(component: str, callback: str) -> str:
    return f"plumb_{component}_{callback}"


def is_usage(stmt: Statement, spec: ResourceSpec, refs: FrozenSet[str], touching: FrozenSet[str]) -> bool:
    """Statement that acquires, releases or uses the resource, directly or through a call"""
    if stmt.op == ACQUIRE:
        return spec.is_acquire(stmt.api)
    if stmt.op in (RELEASE, RELEASE_IF_HELD):
        return spec.is_release(stmt.api)
    if stmt.op == USE:
        return stmt.target in refs
    if stmt.op == CALL:
        return stmt.callee in touching
    return False


def touching_procedures(app: AppModel, spec: ResourceSpec, refs: Optional[FrozenSet[str]] = None) -> FrozenSet[str]:
    """Procedures that touch the resource themselves or through their callees"""
    refs = tracked_refs(app, spec) if refs is None else refs
    direct = {
        name
        for name, proc in app.procedures.items()
        if any(is_usage(stmt, spec, refs, frozenset()) for _, stmt in proc.statements())
    }
    graph = nx.DiGraph()
    graph.add_nodes_from(app.procedures)
    for caller, callees in app.call_graph.items():
        graph.add_edges_from((caller, callee) for callee in callees)
    touching = set(direct)
    for name in direct:
        touching |= nx.ancestors(graph, name)
    return frozenset(touching)


def _live_statements(block: BasicBlock) -> Tuple[Tuple[Statement, ...], Optional[int]]:
    """Statements up to the first Return, and the Return's index"""
    for index, stmt in enumerate(block.statements):
        if stmt.op == RETURN:
            return block.statements[:index], index
    return block.statements, None


def block_graph(proc: Procedure) -> nx.DiGraph:
    """Reachable blocks of a procedure; returning and successor-less blocks feed a virtual exit"""
    graph = nx.DiGraph()
    graph.add_node(_EXIT)
    for block in proc.blocks.values():
        graph.add_node(block.id)
        _, ret = _live_statements(block)
        if ret is not None or not block.successors:
            graph.add_edge(block.id, _EXIT)
        else:
            graph.add_edges_from((block.id, s) for s in block.successors)
    reachable = nx.descendants(graph, proc.entry) | {proc.entry}
    return graph.subgraph(reachable | {_EXIT}).copy()


def postdominator_chain(proc: Procedure) -> List[str]:
    """Blocks post-dominating the entry block, from the entry outwards"""
    graph = block_graph(proc)
    idom = nx.immediate_dominators(graph.reverse(copy=True), _EXIT)
    if proc.entry not in idom:
        # entry block never reaches an exit
        return [proc.entry]
    chain = [proc.entry]
    while idom[chain[-1]] != _EXIT:
        chain.append(idom[chain[-1]])
    return chain


def insertion_point(
    proc: Procedure,
    spec: ResourceSpec,
    refs: FrozenSet[str],
    touching: FrozenSet[str],
) -> Optional[Tuple[str, int]]:
    """
    Where a release goes in a callback procedure

    The deepest block post-dominating the entry receives the release after
    its last usage, else before its Return, else at its end. Returns None
    when a usage can still run after that point.
    """
    block_id = postdominator_chain(proc)[-1]
    block = proc.blocks[block_id]
    live, ret = _live_statements(block)
    used = [i for i, stmt in enumerate(live) if is_usage(stmt, spec, refs, touching)]
    if used:
        index = used[-1] + 1
    elif ret is not None:
        index = ret
    else:
        index = len(block.statements)

    if ret is None:
        graph = block_graph(proc)
        for later in nx.descendants(graph, block_id) - {_EXIT}:
            later_live, _ = _live_statements(proc.blocks[later])
            if any(is_usage(stmt, spec, refs, touching) for stmt in later_live):
                logger.debug(f"Usage in block '{later}' runs after '{proc.name}/{block_id}[{index}]'")
                return None
    return block_id, index


def _fresh_field(app: AppModel, spec: ResourceSpec, taken: Set[str]) -> str:
    names = set(taken)
    for comp in app.components:
        names.update(comp.fields)
    for proc in app.procedures.values():
        names.update(stmt.target for _, stmt in proc.statements() if stmt.target)
    k = 0
    while f"plumb_{spec.name}_{k}" in names:
        k += 1
    return f"plumb_{spec.name}_{k}"


def synthesize_fix(
    report: LeakReport,
    app: AppModel,
    spec: ResourceSpec,
    fields: Optional[Dict[Origin, str]] = None,
    synthesize_missing: bool = True,
) -> Fix:
    """
    Build the fix for one leak report

    Args:
        report: Leak report produced by analyze on app/spec
        app: Application the report was computed on
        spec: Resource list of the leaked resource
        fields: Fields already introduced per acquire origin, shared by the
            fixes of one batch and updated in place
        synthesize_missing: Bind a synthesized procedure when the component
            does not implement the release callback

    Returns:
        Fix in the coordinates of `app`

    Raises:
        NoReleaseCallbackImplemented: if the callback is not implemented
            and synthesize_missing is False
    """
    fields = {} if fields is None else fields
    component = app.component(report.component)
    callback = report.release_callback
    acquire = app.statement_at(report.origin)
    release_op = spec.release_for(acquire.api)
    refs = tracked_refs(app, spec)

    synthesized = wraps = None
    if callback not in component.callbacks:
        if not synthesize_missing:
            raise NoReleaseCallbackImplemented(
                f"Component '{component.name}' does not implement {callback}", entity=component.name,
            )
        synthesized = synthesized_name(component.name, callback)
        location = (synthesized, SYNTHESIZED_BLOCK, 0)
    else:
        proc = app.procedures[component.callbacks[callback]]
        point = insertion_point(proc, spec, refs, touching_procedures(app, spec, refs))
        if point is None:
            synthesized = synthesized_name(component.name, callback)
            wraps = proc.name
            location = (synthesized, SYNTHESIZED_BLOCK, 1)
        else:
            location = (proc.name, *point)

    target = acquire.target
    visible = (
        target is None
        or target in component.fields
        or (synthesized is None and report.origin[0] == location[0])
    )
    introduced = None
    if not visible:
        introduced = fields.get(report.origin) or _fresh_field(app, spec, set(fields.values()))
        fields[report.origin] = introduced

    fix = Fix(
        resource=spec.name,
        release_op=release_op,
        target_ref=introduced or target,
        location=location,
        guarded=spec.held_check,
        introduces_field=introduced,
        component=component.name,
        callback=callback,
        origin=report.origin,
        acquire_target=target,
        synthesized_procedure=synthesized,
        wraps=wraps,
    )
    logger.debug(f"Synthesized fix {fix.describe()}")
    return fix


def synthesize_fixes(reports: Iterable[LeakReport], app: AppModel, spec: ResourceSpec) -> List[Fix]:
    """Fixes for a batch of reports, identical insertions merged, in report order"""
    fields: Dict[Origin, str] = {}
    fixes: Dict[Tuple, Fix] = {}
    for report in reports:
        fix = synthesize_fix(report, app, spec, fields)
        if fix.key in fixes:
            logger.info(f"Fix for {report.describe()} merged with an identical fix")
            continue
        fixes[fix.key] = fix
    return list(fixes.values())


def check_fix(app: AppModel, fix: Fix):
    """
    Raise StaleFix unless the fix can be applied to the app

    Raises:
        StaleFix: if the acquire no longer matches, the location is out of
            range, or the release is already in place
    """
    proc_name, block_id, index = fix.origin
    try:
        acquire = app.statement_at(fix.origin)
    except (KeyError, IndexError):
        raise StaleFix(f"Acquire site {proc_name}/{block_id}[{index}] no longer exists", entity=proc_name)
    if acquire.op != ACQUIRE or acquire.target != fix.acquire_target:
        raise StaleFix(f"Statement at {proc_name}/{block_id}[{index}] is not the leaked acquire", entity=proc_name)

    component = app.component(fix.component)
    if fix.synthesized_procedure:
        if fix.synthesized_procedure in app.procedures:
            raise StaleFix(f"Procedure '{fix.synthesized_procedure}' already exists", entity=fix.synthesized_procedure)
        if component.callbacks.get(fix.callback) != fix.wraps:
            raise StaleFix(f"Callback {fix.callback} of '{component.name}' was rebound", entity=component.name)
        return

    proc_name, block_id, index = fix.location
    proc = app.procedures.get(proc_name)
    if proc is None or block_id not in proc.blocks:
        raise StaleFix(f"Fix location {proc_name}/{block_id} no longer exists", entity=proc_name)
    statements = proc.blocks[block_id].statements
    if index > len(statements):
        raise StaleFix(f"Fix location {proc_name}/{block_id}[{index}] is out of range", entity=proc_name)
    if fix.statement in statements[max(0, index - 1): index + 1]:
        raise StaleFix(f"Fix at {proc_name}/{block_id}[{index}] is already applied", entity=proc_name)


def _insert(statements: Tuple[Statement, ...], inserts: List[Tuple[int, int, Statement]]) -> Tuple[Statement, ...]:
    out = list(statements)
    # (index, rank, statement); rank orders insertions sharing an index
    for index, _, stmt in sorted(inserts, key=lambda x: (-x[0], -x[1])):
        out.insert(index, stmt)
    return tuple(out)


def apply_fixes(app: AppModel, fixes: Iterable[Fix]) -> AppModel:
    """
    Apply a batch of fixes synthesized on `app`

    Returns:
        New AppModel; statements outside the fix locations are unchanged

    Raises:
        StaleFix: if any fix does not match the app
    """
    batch: Dict[Tuple, Fix] = {}
    for fix in fixes:
        batch.setdefault(fix.key, fix)
    ordered = list(batch.values())
    for fix in ordered:
        check_fix(app, fix)

    inserts: Dict[Tuple[str, str], List[Tuple[int, int, Statement]]] = {}
    rewrites: Dict[Origin, Statement] = {}
    new_fields: Dict[str, List[str]] = {}
    synthesized: Dict[str, List[Fix]] = {}

    for rank, fix in enumerate(ordered):
        if fix.introduces_field and fix.origin not in rewrites:
            acquire = app.statement_at(fix.origin)
            rewrites[fix.origin] = replace(acquire, target=fix.introduces_field)
            proc_name, block_id, index = fix.origin
            alias = Statement(OTHER, api=ALIAS_API, target=fix.acquire_target)
            inserts.setdefault((proc_name, block_id), []).append((index + 1, -1, alias))
        if fix.introduces_field:
            fields = new_fields.setdefault(fix.component, [])
            if fix.introduces_field not in fields:
                fields.append(fix.introduces_field)
        if fix.synthesized_procedure:
            synthesized.setdefault(fix.synthesized_procedure, []).append(fix)
        else:
            proc_name, block_id, index = fix.location
            inserts.setdefault((proc_name, block_id), []).append((index, rank, fix.statement))

    procedures = dict(app.procedures)
    touched = {proc_name for proc_name, _ in inserts} | {origin[0] for origin in rewrites}
    for proc_name in sorted(touched):
        proc = procedures[proc_name]
        blocks = {}
        for block_id, block in proc.blocks.items():
            statements = tuple(
                rewrites.get((proc_name, block_id, i), stmt) for i, stmt in enumerate(block.statements)
            )
            statements = _insert(statements, inserts.get((proc_name, block_id), []))
            blocks[block_id] = replace(block, statements=statements)
        procedures[proc_name] = replace(proc, blocks=blocks)

    bindings: Dict[str, Dict[str, str]] = {}
    for name, group in synthesized.items():
        head = group[0]
        body = [Statement(CALL, callee=head.wraps)] if head.wraps else []
        body += [fix.statement for fix in group]
        body.append(Statement(RETURN))
        procedures[name] = Procedure(name, SYNTHESIZED_BLOCK, {SYNTHESIZED_BLOCK: BasicBlock(SYNTHESIZED_BLOCK, tuple(body))})
        bindings.setdefault(head.component, {})[head.callback] = name

    components = []
    for comp in app.components:
        if comp.name in new_fields or comp.name in bindings:
            comp = _patched_component(comp, new_fields.get(comp.name, []), bindings.get(comp.name, {}))
        components.append(comp)

    logger.info(f"Applied {len(ordered)} fix(es) to '{app.name}'")
    return replace(app, components=tuple(components), procedures=procedures)


def _patched_component(comp: Component, fields: List[str], bindings: Dict[str, str]) -> Component:
    callbacks = dict(comp.callbacks)
    callbacks.update(bindings)
    extra = tuple(f for f in fields if f not in comp.fields)
    return replace(comp, callbacks=callbacks, fields=comp.fields + extra)


def apply_fix(app: AppModel, fix: Fix) -> AppModel:
    """Apply a single fix (see apply_fixes)"""
    return apply_fixes(app, [fix])
