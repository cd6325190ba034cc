"""
Application intermediate representation, its JSON encoding and resource specs
"""
from .model import (
    ACQUIRE,
    CALL,
    OTHER,
    RELEASE,
    RELEASE_IF_HELD,
    RETURN,
    USE,
    AppModel,
    BasicBlock,
    CallbackEdge,
    CallbackGraph,
    Component,
    Origin,
    Procedure,
    ResourceSpec,
    Statement,
)
from .lifecycles import ACTIVITY, resolve_lifecycle
from .parser import app_to_dict, parse_app, parse_resource_spec, resource_spec_to_dict, serialize_app
from .resources import list_bundled, load_bundled, load_resource

__all__ = [
    'ACQUIRE', 'CALL', 'OTHER', 'RELEASE', 'RELEASE_IF_HELD', 'RETURN', 'USE',
    'AppModel', 'BasicBlock', 'CallbackEdge', 'CallbackGraph', 'Component', 'Origin',
    'Procedure', 'ResourceSpec', 'Statement',
    'ACTIVITY', 'resolve_lifecycle',
    'app_to_dict', 'parse_app', 'parse_resource_spec', 'resource_spec_to_dict', 'serialize_app',
    'list_bundled', 'load_bundled', 'load_resource',
]
