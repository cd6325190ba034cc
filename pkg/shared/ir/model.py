"""
Application intermediate representation.

All values are immutable after construction and can be shared across
analysis threads.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterator, Mapping, Optional, Tuple

# Statement kinds, as spelled in IR documents
ACQUIRE = "acquire"
RELEASE = "release"
USE = "use"
CALL = "call"
RETURN = "return"
OTHER = "other"
RELEASE_IF_HELD = "release_if_held"

STATEMENT_KINDS = (ACQUIRE, RELEASE, USE, CALL, RETURN, OTHER, RELEASE_IF_HELD)

# (procedure, block id, statement index)
Origin = Tuple[str, str, int]


@dataclass(frozen=True)
class Statement:
    op: str
    api: Optional[str] = None
    target: Optional[str] = None
    callee: Optional[str] = None

    def __str__(self):
        if self.op == CALL:
            return f"call {self.callee}"
        if self.op in (RETURN,):
            return "return"
        parts = [self.op]
        if self.api:
            parts.append(self.api)
        if self.target:
            parts.append(f"({self.target})")
        return " ".join(parts)


@dataclass(frozen=True)
class BasicBlock:
    id: str
    statements: Tuple[Statement, ...] = ()
    successors: Tuple[str, ...] = ()


@dataclass(frozen=True)
class Procedure:
    name: str
    entry: str
    blocks: Mapping[str, BasicBlock] = field(default_factory=dict)

    def block(self, block_id: str) -> BasicBlock:
        return self.blocks[block_id]

    def statements(self) -> Iterator[Tuple[Origin, Statement]]:
        """Iterate every statement with its origin triple"""
        for block in self.blocks.values():
            for index, stmt in enumerate(block.statements):
                yield (self.name, block.id, index), stmt


@dataclass(frozen=True)
class CallbackEdge:
    source: str
    target: str
    callbacks: Tuple[str, ...]


@dataclass(frozen=True)
class CallbackGraph:
    name: str
    states: Tuple[str, ...]
    initial: str
    edges: Tuple[CallbackEdge, ...]

    def out_edges(self, state: str) -> Tuple[CallbackEdge, ...]:
        return tuple(e for e in self.edges if e.source == state)

    def callbacks(self) -> FrozenSet[str]:
        return frozenset(cb for e in self.edges for cb in e.callbacks)


@dataclass(frozen=True)
class Component:
    name: str
    lifecycle: str
    callbacks: Mapping[str, str] = field(default_factory=dict)
    # references visible from every callback of the component
    fields: Tuple[str, ...] = ()


@dataclass(frozen=True)
class ResourceSpec:
    """
    Resource list: acquire/release pairs plus the release policy data
    of one Android resource type.
    """
    name: str
    pairs: Tuple[Tuple[str, str], ...]
    reentrant: bool
    release_callbacks: Tuple[str, ...]
    held_check: Optional[str] = None

    @cached_property
    def acquire_ops(self) -> Tuple[str, ...]:
        return tuple(dict.fromkeys(a for a, _ in self.pairs))

    @cached_property
    def release_ops(self) -> Tuple[str, ...]:
        return tuple(dict.fromkeys(r for _, r in self.pairs))

    def is_acquire(self, op: Optional[str]) -> bool:
        return op in self.acquire_ops

    def is_release(self, op: Optional[str]) -> bool:
        return op in self.release_ops

    def matches(self, acquire: str, release: str) -> bool:
        return (acquire, release) in self.pairs

    def release_for(self, acquire: str) -> Optional[str]:
        """First release operation paired with an acquire, in pair order"""
        for a, r in self.pairs:
            if a == acquire:
                return r
        return None


@dataclass(frozen=True)
class AppModel:
    name: str
    components: Tuple[Component, ...]
    procedures: Mapping[str, Procedure]
    lifecycles: Mapping[str, CallbackGraph] = field(default_factory=dict)

    @cached_property
    def call_graph(self) -> Dict[str, FrozenSet[str]]:
        """Direct internal callees of every procedure"""
        graph = {}
        for name, proc in self.procedures.items():
            callees = set()
            for _, stmt in proc.statements():
                if stmt.op == CALL and stmt.callee in self.procedures:
                    callees.add(stmt.callee)
            graph[name] = frozenset(callees)
        return graph

    @cached_property
    def external_callees(self) -> FrozenSet[str]:
        return frozenset(
            stmt.callee
            for proc in self.procedures.values()
            for _, stmt in proc.statements()
            if stmt.op == CALL and stmt.callee not in self.procedures
        )

    def component(self, name: str) -> Component:
        for comp in self.components:
            if comp.name == name:
                return comp
        raise KeyError(name)

    def statement_at(self, origin: Origin) -> Statement:
        proc, block_id, index = origin
        return self.procedures[proc].blocks[block_id].statements[index]

    def __eq__(self, other):
        if not isinstance(other, AppModel):
            return NotImplemented
        return (
            self.name == other.name
            and self.components == other.components
            and dict(self.procedures) == dict(other.procedures)
            and dict(self.lifecycles) == dict(other.lifecycles)
        )
