"""
General utility functions
"""
import json
from typing import Any, Optional


def to_json(data: Any, indent: Optional[int] = 2) -> str:
    """
    Serialize a document for output

    Key order is preserved so identical inputs give byte-identical outputs.

    Args:
        data: JSON-compatible value
        indent: Indentation passed to json.dumps

    Returns:
        JSON text
    """
    return json.dumps(data, ensure_ascii=False, indent=indent)

