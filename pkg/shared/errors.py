"""
Exception hierarchy shared by the IR, analysis, repair and oracle layers
"""
from typing import Optional


class PlumbError(Exception):
    """Base class for every error raised by the engine"""

    def __init__(self, message: str, entity: Optional[str] = None):
        super().__init__(message)
        self.entity = entity


class SchemaError(PlumbError, ValueError):
    """Document does not follow the IR / resource spec JSON schema"""


class ValidationError(PlumbError, ValueError):
    """Document is well-formed but violates a model invariant"""


class SpecError(PlumbError):
    """Resource spec cannot be turned into a resource automaton"""


class NotDeterministic(PlumbError):
    pass


class AlphabetMismatch(PlumbError):
    pass


class NoReleaseCallback(PlumbError):
    """Lifecycle graph never invokes any of the resource's release callbacks"""


class NoReleaseCallbackImplemented(PlumbError):
    """Component implements none of the resource's release callbacks"""


class StaleFix(PlumbError):
    """Fix location no longer matches the app it is applied to"""


class BudgetExceeded(PlumbError):
    """Brute-force enumeration went over its path budget"""


class ConfigError(PlumbError, ValueError):
    pass


class CycleWarning(UserWarning):
    """
    Call-graph cycle that was broken to allow a topological order.

    Carried as analysis metadata rather than raised.
    """

    def __init__(self, caller: str, callee: str):
        super().__init__(f"call-graph cycle broken at {caller} -> {callee}")
        self.caller = caller
        self.callee = callee

    def to_dict(self):
        return {"kind": "CycleWarning", "caller": self.caller, "callee": self.callee}

    def __eq__(self, other):
        return isinstance(other, CycleWarning) and (self.caller, self.callee) == (other.caller, other.callee)

    def __hash__(self):
        return hash((self.caller, self.callee))
