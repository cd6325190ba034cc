"""
Bundled resource lists (Android resource table) and spec loading helpers
"""
import logging
import os
from typing import List

from shared.errors import SchemaError
from shared.ir.model import ResourceSpec
from shared.ir.parser import parse_resource_spec

logger = logging.getLogger(__name__)

RESOURCES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "resources")


def list_bundled() -> List[str]:
    """Names of the bundled resource specs, sorted"""
    return sorted(
        os.path.splitext(name)[0]
        for name in os.listdir(RESOURCES_DIR)
        if name.endswith(".json")
    )


def load_bundled(name: str) -> ResourceSpec:
    """
    Load a bundled resource spec by resource name

    Raises:
        SchemaError: if no bundled spec has that name
    """
    path = os.path.join(RESOURCES_DIR, f"{name}.json")
    if name not in list_bundled():
        raise SchemaError(f"Unknown bundled resource '{name}'", entity=name)
    with open(path, encoding="utf-8") as fh:
        return parse_resource_spec(fh.read())


def load_resource(path_or_name: str) -> ResourceSpec:
    """Load a resource spec from a file path, falling back to a bundled name"""
    if os.path.isfile(path_or_name):
        with open(path_or_name, "rb") as fh:
            return parse_resource_spec(fh.read())
    logger.debug(f"'{path_or_name}' is not a file, trying bundled resources")
    return load_bundled(path_or_name)
