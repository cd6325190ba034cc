"""
Validation utilities for IR and resource spec documents
"""
from typing import Any, List, Optional, Tuple

from shared.ir.model import ACQUIRE, CALL, RELEASE, RELEASE_IF_HELD, STATEMENT_KINDS, USE

# Symbols the automata reserve for themselves
RESERVED_OPERATION_NAMES = ("s", "f", "use")
RESERVED_OPERATION_PREFIXES = ("?", "*")


def validate_required_fields(data: dict, fields: List[str]) -> Tuple[bool, Optional[str]]:
    """
    Validate that required fields are present in data

    Args:
        data: Dictionary to validate
        fields: List of required field names

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not isinstance(data, dict):
        return False, "Expected a JSON object"

    for field in fields:
        if field not in data or data[field] is None or data[field] == "":
            return False, f"Field '{field}' is required"

    return True, None


def validate_identifier(value: Any, what: str = "identifier") -> Tuple[bool, Optional[str]]:
    """
    Validate an IR identifier (non-empty string, compared byte-exact)

    Args:
        value: candidate identifier
        what: name used in the error message

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not isinstance(value, str) or not value:
        return False, f"{what} must be a non-empty string"
    return True, None


def validate_string_list(value: Any, what: str, allow_empty: bool = True) -> Tuple[bool, Optional[str]]:
    if not isinstance(value, list):
        return False, f"{what} must be a list"
    if not allow_empty and not value:
        return False, f"{what} must not be empty"
    for item in value:
        ok, msg = validate_identifier(item, f"{what} entry")
        if not ok:
            return False, msg
    return True, None


def validate_statement(data: Any) -> Tuple[bool, Optional[str]]:
    """
    Validate a statement object {op, api?, target?, callee?}

    Returns:
        Tuple of (is_valid, error_message)
    """
    ok, msg = validate_required_fields(data, ["op"])
    if not ok:
        return False, msg
    op = data["op"]
    if op not in STATEMENT_KINDS:
        return False, f"Unknown statement op '{op}'"
    if op in (ACQUIRE, RELEASE, RELEASE_IF_HELD):
        for key in ("api", "target"):
            ok, msg = validate_identifier(data.get(key), f"'{op}' statement {key}")
            if not ok:
                return False, msg
    if op == USE:
        ok, msg = validate_identifier(data.get("target"), "'use' statement target")
        if not ok:
            return False, msg
    if op == CALL:
        ok, msg = validate_identifier(data.get("callee"), "'call' statement callee")
        if not ok:
            return False, msg
    for key in ("api", "target", "callee"):
        if key in data and data[key] is not None and not isinstance(data[key], str):
            return False, f"Statement field '{key}' must be a string"
    return True, None


def validate_operation_name(op: Any) -> Tuple[bool, Optional[str]]:
    """Resource operations must not collide with the automata's own symbols"""
    ok, msg = validate_identifier(op, "operation")
    if not ok:
        return False, msg
    if op in RESERVED_OPERATION_NAMES or op.startswith(RESERVED_OPERATION_PREFIXES):
        return False, f"Operation name '{op}' is reserved"
    return True, None


def validate_request_body(body: Any, require_app: bool = True) -> Tuple[bool, Optional[str]]:
    """
    Validate an HTTP request body {app, resource | resource_name, depth?, release?, validate?}

    Returns:
        Tuple of (is_valid, error_message)
    """
    if not isinstance(body, dict):
        return False, "Request body must be a JSON object"
    if require_app and not isinstance(body.get("app"), (dict, str)):
        return False, "Field 'app' must be an IR document"
    if body.get("resource") is None and body.get("resource_name") is None:
        return False, "Either 'resource' or 'resource_name' is required"
    if body.get("resource") is not None and not isinstance(body["resource"], (dict, str)):
        return False, "Field 'resource' must be a resource spec document"
    if body.get("resource_name") is not None:
        ok, msg = validate_identifier(body["resource_name"], "resource_name")
        if not ok:
            return False, msg
    depth = body.get("depth")
    if depth is not None and (isinstance(depth, bool) or not isinstance(depth, int) or depth < 1):
        return False, "Field 'depth' must be a positive integer"
    if body.get("release") is not None and body["release"] not in ("early", "late"):
        return False, "Field 'release' must be 'early' or 'late'"
    if body.get("validate") is not None and not isinstance(body["validate"], bool):
        return False, "Field 'validate' must be a boolean"
    return True, None
