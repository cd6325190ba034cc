"""
JSON encoding of the IR: parse_app, serialize_app and parse_resource_spec
"""
import json
import logging
from typing import Any, Dict, List, Tuple

import networkx as nx

from shared.errors import SchemaError, ValidationError
from shared.ir.lifecycles import BUILTIN_LIFECYCLES
from shared.ir.model import (
    AppModel,
    BasicBlock,
    CallbackEdge,
    CallbackGraph,
    Component,
    Procedure,
    ResourceSpec,
    Statement,
)
from shared.validators import (
    validate_identifier,
    validate_operation_name,
    validate_required_fields,
    validate_statement,
    validate_string_list,
)

logger = logging.getLogger(__name__)


def _load_json(text: Any) -> Any:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise SchemaError(f"Document is not valid UTF-8: {e}")
    if not isinstance(text, str):
        raise SchemaError("Document must be UTF-8 text")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"Malformed JSON: {e}")


def _require(ok_msg: Tuple[bool, Any], entity: str):
    ok, msg = ok_msg
    if not ok:
        raise SchemaError(f"{entity}: {msg}", entity=entity)


def _parse_block(proc_name: str, data: Any) -> BasicBlock:
    _require(validate_required_fields(data, ["id"]), f"procedure '{proc_name}' block")
    block_id = data["id"]
    entity = f"{proc_name}/{block_id}"
    _require(validate_identifier(block_id, "block id"), entity)
    statements = data.get("statements", [])
    if not isinstance(statements, list):
        raise SchemaError(f"{entity}: statements must be a list", entity=entity)
    parsed = []
    for index, stmt in enumerate(statements):
        _require(validate_statement(stmt), f"{entity}[{index}]")
        parsed.append(Statement(
            op=stmt["op"],
            api=stmt.get("api"),
            target=stmt.get("target"),
            callee=stmt.get("callee"),
        ))
    _require(validate_string_list(data.get("successors", []), "successors"), entity)
    return BasicBlock(id=block_id, statements=tuple(parsed), successors=tuple(data.get("successors", [])))


def _parse_procedure(data: Any) -> Procedure:
    _require(validate_required_fields(data, ["name", "entry", "blocks"]), "procedure")
    name = data["name"]
    _require(validate_identifier(name, "procedure name"), "procedure")
    if not isinstance(data["blocks"], list) or not data["blocks"]:
        raise SchemaError(f"procedure '{name}': blocks must be a non-empty list", entity=name)

    blocks: Dict[str, BasicBlock] = {}
    for raw in data["blocks"]:
        block = _parse_block(name, raw)
        if block.id in blocks:
            raise ValidationError(f"Duplicate block id '{block.id}' in procedure '{name}'", entity=f"{name}/{block.id}")
        blocks[block.id] = block

    entry = data["entry"]
    if entry not in blocks:
        raise ValidationError(f"Entry block '{entry}' of procedure '{name}' does not exist", entity=entry)
    for block in blocks.values():
        for succ in block.successors:
            if succ not in blocks:
                raise ValidationError(
                    f"Block '{block.id}' of procedure '{name}' names missing successor '{succ}'",
                    entity=succ,
                )

    cfg = nx.DiGraph()
    cfg.add_nodes_from(blocks)
    cfg.add_edges_from((b.id, s) for b in blocks.values() for s in b.successors)
    reachable = nx.descendants(cfg, entry) | {entry}
    for block_id in blocks:
        if block_id not in reachable:
            raise ValidationError(f"Block '{block_id}' of procedure '{name}' is unreachable", entity=block_id)

    return Procedure(name=name, entry=entry, blocks=blocks)


def _parse_lifecycle(data: Any) -> CallbackGraph:
    _require(validate_required_fields(data, ["name", "states", "initial"]), "lifecycle")
    name = data["name"]
    _require(validate_string_list(data["states"], f"lifecycle '{name}' states", allow_empty=False), name)
    states = tuple(data["states"])
    if data["initial"] not in states:
        raise ValidationError(f"Initial state '{data['initial']}' of lifecycle '{name}' is not a state", entity=data["initial"])
    edges = []
    raw_edges = data.get("edges", [])
    if not isinstance(raw_edges, list):
        raise SchemaError(f"lifecycle '{name}': edges must be a list", entity=name)
    for raw in raw_edges:
        _require(validate_required_fields(raw, ["from", "to"]), f"lifecycle '{name}' edge")
        for end in (raw["from"], raw["to"]):
            if end not in states:
                raise ValidationError(f"Lifecycle '{name}' edge names unknown state '{end}'", entity=end)
        _require(validate_string_list(raw.get("callbacks", []), "edge callbacks"), name)
        edges.append(CallbackEdge(raw["from"], raw["to"], tuple(raw.get("callbacks", []))))
    return CallbackGraph(name=name, states=states, initial=data["initial"], edges=tuple(edges))


def _parse_component(data: Any, procedures: Dict[str, Procedure], lifecycles: Dict[str, CallbackGraph]) -> Component:
    _require(validate_required_fields(data, ["name", "lifecycle"]), "component")
    name = data["name"]
    lifecycle = data["lifecycle"]
    if lifecycle not in lifecycles and lifecycle not in BUILTIN_LIFECYCLES:
        raise ValidationError(f"Component '{name}' uses unknown lifecycle '{lifecycle}'", entity=lifecycle)
    callbacks = data.get("callbacks", {})
    if not isinstance(callbacks, dict):
        raise SchemaError(f"component '{name}': callbacks must be an object", entity=name)
    for cb, proc in callbacks.items():
        _require(validate_identifier(proc, f"callback '{cb}' procedure"), name)
        if proc not in procedures:
            raise ValidationError(f"Callback '{cb}' of component '{name}' names missing procedure '{proc}'", entity=proc)
    _require(validate_string_list(data.get("fields", []), "fields"), name)
    return Component(name=name, lifecycle=lifecycle, callbacks=dict(callbacks), fields=tuple(data.get("fields", [])))


def parse_app(text: Any) -> AppModel:
    """
    Parse and validate an IR document

    Args:
        text: UTF-8 JSON document {app, components[], procedures[], lifecycles[]?}

    Returns:
        Validated AppModel

    Raises:
        SchemaError: malformed document
        ValidationError: dangling block id, unreachable block, duplicate name, ...
    """
    data = _load_json(text)
    _require(validate_required_fields(data, ["app"]), "app")
    for key in ("components", "procedures"):
        if not isinstance(data.get(key, []), list):
            raise SchemaError(f"'{key}' must be a list", entity=key)

    lifecycles: Dict[str, CallbackGraph] = {}
    for raw in data.get("lifecycles", []) or []:
        graph = _parse_lifecycle(raw)
        if graph.name in lifecycles:
            raise ValidationError(f"Duplicate lifecycle '{graph.name}'", entity=graph.name)
        lifecycles[graph.name] = graph

    procedures: Dict[str, Procedure] = {}
    for raw in data.get("procedures", []):
        proc = _parse_procedure(raw)
        if proc.name in procedures:
            raise ValidationError(f"Duplicate procedure name '{proc.name}'", entity=proc.name)
        procedures[proc.name] = proc

    components: List[Component] = []
    for raw in data.get("components", []):
        comp = _parse_component(raw, procedures, lifecycles)
        if any(c.name == comp.name for c in components):
            raise ValidationError(f"Duplicate component name '{comp.name}'", entity=comp.name)
        components.append(comp)

    app = AppModel(name=data["app"], components=tuple(components), procedures=procedures, lifecycles=lifecycles)
    for callee in sorted(app.external_callees):
        logger.warning(f"External callee '{callee}' in app '{app.name}' is treated as a non-resource operation")
    return app


def _statement_to_dict(stmt: Statement) -> Dict[str, str]:
    out = {"op": stmt.op}
    for key in ("api", "target", "callee"):
        value = getattr(stmt, key)
        if value is not None:
            out[key] = value
    return out


def app_to_dict(app: AppModel) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"app": app.name}
    if app.lifecycles:
        doc["lifecycles"] = [
            {
                "name": g.name,
                "states": list(g.states),
                "initial": g.initial,
                "edges": [{"from": e.source, "to": e.target, "callbacks": list(e.callbacks)} for e in g.edges],
            }
            for g in app.lifecycles.values()
        ]
    doc["components"] = []
    for comp in app.components:
        entry = {"name": comp.name, "lifecycle": comp.lifecycle, "callbacks": dict(comp.callbacks)}
        if comp.fields:
            entry["fields"] = list(comp.fields)
        doc["components"].append(entry)
    doc["procedures"] = [
        {
            "name": proc.name,
            "entry": proc.entry,
            "blocks": [
                {
                    "id": block.id,
                    "statements": [_statement_to_dict(s) for s in block.statements],
                    "successors": list(block.successors),
                }
                for block in proc.blocks.values()
            ],
        }
        for proc in app.procedures.values()
    ]
    return doc


def serialize_app(app: AppModel) -> str:
    """Serialize an AppModel to its IR document (parse_app inverts it)"""
    return json.dumps(app_to_dict(app), ensure_ascii=False, indent=2)


def parse_resource_spec(text: Any) -> ResourceSpec:
    """
    Parse a resource spec document

    Args:
        text: UTF-8 JSON {resource, reentrant, pairs:[[a,r],...], release_callbacks:[], held_check?}

    Returns:
        ResourceSpec

    Raises:
        SchemaError: malformed document
        ValidationError: empty pairs / release_callbacks, repeated pair, reserved names
    """
    data = _load_json(text)
    _require(validate_required_fields(data, ["resource"]), "resource spec")
    name = data["resource"]
    _require(validate_identifier(name, "resource"), "resource spec")
    if not isinstance(data.get("reentrant", False), bool):
        raise SchemaError(f"resource '{name}': reentrant must be a boolean", entity=name)

    raw_pairs = data.get("pairs")
    if not isinstance(raw_pairs, list):
        raise SchemaError(f"resource '{name}': pairs must be a list", entity=name)
    if not raw_pairs:
        raise ValidationError(f"resource '{name}': pairs must not be empty", entity=name)
    pairs = []
    for raw in raw_pairs:
        if not isinstance(raw, list) or len(raw) != 2:
            raise SchemaError(f"resource '{name}': each pair must be [acquire, release]", entity=name)
        for op in raw:
            ok, msg = validate_operation_name(op)
            if not ok:
                raise ValidationError(f"resource '{name}': {msg}", entity=str(op))
        pair = (raw[0], raw[1])
        if pair in pairs:
            raise ValidationError(f"resource '{name}': pair {list(pair)} repeats", entity=f"{pair[0]}/{pair[1]}")
        pairs.append(pair)
    overlap = {a for a, _ in pairs} & {r for _, r in pairs}
    if overlap:
        op = sorted(overlap)[0]
        raise ValidationError(f"resource '{name}': '{op}' is both an acquire and a release", entity=op)

    callbacks = data.get("release_callbacks")
    if not isinstance(callbacks, list):
        raise SchemaError(f"resource '{name}': release_callbacks must be a list", entity=name)
    ok, msg = validate_string_list(callbacks, "release_callbacks", allow_empty=False)
    if not ok:
        raise ValidationError(f"resource '{name}': {msg}", entity=name)

    held_check = data.get("held_check")
    if held_check is not None:
        _require(validate_identifier(held_check, "held_check"), name)

    return ResourceSpec(
        name=name,
        pairs=tuple(pairs),
        reentrant=data.get("reentrant", False),
        release_callbacks=tuple(callbacks),
        held_check=held_check,
    )


def resource_spec_to_dict(spec: ResourceSpec) -> Dict[str, Any]:
    doc = {
        "resource": spec.name,
        "reentrant": spec.reentrant,
        "pairs": [list(p) for p in spec.pairs],
        "release_callbacks": list(spec.release_callbacks),
    }
    if spec.held_check:
        doc["held_check"] = spec.held_check
    return doc
