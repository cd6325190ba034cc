"""
Seeded random apps and depth fixtures for differential testing
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from shared.ir.lifecycles import ACTIVITY
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
    CallbackEdge,
    CallbackGraph,
    Component,
    Procedure,
    ResourceSpec,
    Statement,
)

logger = logging.getLogger(__name__)

REFS = ("r0", "r1")
_KINDS = (ACQUIRE, RELEASE, USE, CALL, OTHER)


@dataclass(frozen=True)
class CorpusConfig:
    max_procedures: int = 6
    max_blocks: int = 8
    max_statements: int = 4
    max_components: int = 2
    acquire_density: float = 0.3
    release_density: float = 0.25
    use_density: float = 0.15
    call_density: float = 0.1
    guarded_ratio: float = 0.2
    return_probability: float = 0.1
    loop_probability: float = 0.15
    # probability that a call targets a procedure at or before the caller
    cycle_probability: float = 0.0
    callback_probability: float = 0.6
    field_probability: float = 0.3

    def kind_weights(self) -> np.ndarray:
        weights = np.array([
            self.acquire_density,
            self.release_density,
            self.use_density,
            self.call_density,
            max(0.0, 1.0 - self.acquire_density - self.release_density - self.use_density - self.call_density),
        ])
        return weights / weights.sum()


def _statement(rng: np.random.Generator, spec: ResourceSpec, config: CorpusConfig, proc_index: int, n_procs: int) -> Statement:
    kind = str(rng.choice(_KINDS, p=config.kind_weights()))
    target = str(rng.choice(REFS))
    if kind == ACQUIRE:
        return Statement(ACQUIRE, api=str(rng.choice(spec.acquire_ops)), target=target)
    if kind == RELEASE:
        op = RELEASE_IF_HELD if rng.random() < config.guarded_ratio else RELEASE
        return Statement(op, api=str(rng.choice(spec.release_ops)), target=target)
    if kind == USE:
        return Statement(USE, target=target)
    if kind == CALL:
        if rng.random() < config.cycle_probability:
            callee = int(rng.integers(0, proc_index + 1))
        elif proc_index + 1 < n_procs:
            callee = int(rng.integers(proc_index + 1, n_procs))
        else:
            return Statement(CALL, callee="log")
        return Statement(CALL, callee=f"proc_{callee}")
    return Statement(OTHER)


def _procedure(rng: np.random.Generator, spec: ResourceSpec, config: CorpusConfig, index: int, n_procs: int) -> Procedure:
    n_blocks = int(rng.integers(1, config.max_blocks + 1))
    blocks: Dict[str, BasicBlock] = {}
    for i in range(n_blocks):
        statements = [
            _statement(rng, spec, config, index, n_procs)
            for _ in range(int(rng.integers(0, config.max_statements + 1)))
        ]
        if rng.random() < config.return_probability:
            statements.append(Statement(RETURN))
        successors: List[str] = []
        if i + 1 < n_blocks:
            successors.append(f"b{i + 1}")
            if i + 2 < n_blocks and rng.random() < 0.3:
                successors.append(f"b{int(rng.integers(i + 2, n_blocks))}")
        if rng.random() < config.loop_probability:
            back = f"b{int(rng.integers(0, i + 1))}"
            if back not in successors:
                successors.append(back)
        blocks[f"b{i}"] = BasicBlock(f"b{i}", tuple(statements), tuple(successors))
    return Procedure(f"proc_{index}", "b0", blocks)


def generate_app(
    rng: np.random.Generator,
    spec: ResourceSpec,
    config: Optional[CorpusConfig] = None,
    name: str = "generated",
) -> AppModel:
    """Random activity app exercising one resource"""
    config = config or CorpusConfig()
    n_procs = int(rng.integers(1, config.max_procedures + 1))
    procedures = {f"proc_{i}": _procedure(rng, spec, config, i, n_procs) for i in range(n_procs)}
    callbacks = [cb for edge in ACTIVITY.edges for cb in edge.callbacks]
    components = []
    for c in range(int(rng.integers(1, config.max_components + 1))):
        bound = {
            cb: f"proc_{int(rng.integers(0, n_procs))}"
            for cb in dict.fromkeys(callbacks)
            if rng.random() < config.callback_probability
        }
        fields = tuple(ref for ref in REFS if rng.random() < config.field_probability)
        components.append(Component(f"Component{c}", ACTIVITY.name, bound, fields))
    return AppModel(name, tuple(components), procedures)


def generate_corpus(
    seed: int,
    count: int,
    spec: ResourceSpec,
    config: Optional[CorpusConfig] = None,
) -> List[AppModel]:
    """
    Reproducible corpus of random apps

    The same seed, count, spec and config always yield the same apps.
    """
    rng = np.random.default_rng(seed)
    apps = [generate_app(rng, spec, config, name=f"corpus_{seed}_{i}") for i in range(count)]
    logger.info(f"Generated {len(apps)} app(s) for {spec.name} with seed {seed}")
    return apps


# -- depth fixtures --------------------------------------------------------

# Idle -(onCreate)-> Ready, Ready -(onTrackChange)-> Ready, Ready -(onPause)-> Closed
LOOPING = CallbackGraph(
    name="looping",
    states=("Idle", "Ready", "Closed"),
    initial="Idle",
    edges=(
        CallbackEdge("Idle", "Ready", ("onCreate",)),
        CallbackEdge("Ready", "Ready", ("onTrackChange",)),
        CallbackEdge("Ready", "Closed", ("onPause",)),
    ),
)


def _straight(name: str, statements: Sequence[Statement]) -> Procedure:
    return Procedure(name, "b0", {"b0": BasicBlock("b0", tuple(statements) + (Statement(RETURN),))})


def depth_fixture(
    name: str,
    spec: ResourceSpec,
    track_change: Sequence[str],
    pause: Sequence[str],
    helper: bool = False,
) -> AppModel:
    """
    App on the looping lifecycle whose onTrackChange callback re-runs
    without passing the release callback

    Args:
        name: App name
        spec: Reentrant resource list with onPause as release callback
        track_change: "acquire" / "release" steps of onTrackChange
        pause: "release" / "release_if_held" steps of onPause
        helper: Run onTrackChange's steps in a helper procedure it calls
    """
    acquire_op, release_op = spec.pairs[0]
    ops = {"acquire": (ACQUIRE, acquire_op), "release": (RELEASE, release_op), "release_if_held": (RELEASE_IF_HELD, release_op)}

    def steps(names: Sequence[str]) -> List[Statement]:
        return [Statement(ops[n][0], api=ops[n][1], target="lock") for n in names]

    procedures = {"onCreate": _straight("onCreate", [Statement(OTHER, api="setContentView")])}
    if helper:
        procedures["switchTrack"] = _straight("switchTrack", steps(track_change))
        procedures["onTrackChange"] = _straight("onTrackChange", [Statement(CALL, callee="switchTrack")])
    else:
        procedures["onTrackChange"] = _straight("onTrackChange", steps(track_change))
    procedures["onPause"] = _straight("onPause", steps(pause))
    component = Component(
        "PlayerActivity",
        LOOPING.name,
        {"onCreate": "onCreate", "onTrackChange": "onTrackChange", "onPause": "onPause"},
        ("lock",),
    )
    return AppModel(name, (component,), procedures, {LOOPING.name: LOOPING})


DEPTH_FIXTURES: Tuple[Tuple[str, Tuple[str, ...], Tuple[str, ...], bool], ...] = (
    ("unreleased", ("acquire",), (), False),
    ("single_release", ("acquire",), ("release",), False),
    ("net_one", ("acquire", "acquire", "release"), ("release",), False),
    ("double_acquire", ("acquire", "acquire"), ("release", "release"), False),
    ("helper_unreleased", ("acquire",), (), True),
    ("helper_single_release", ("acquire",), ("release",), True),
)


def depth_fixtures(spec: ResourceSpec) -> List[AppModel]:
    """Fixtures whose leaks need the acquiring callback to run more than once"""
    return [depth_fixture(name, spec, track, pause, helper) for name, track, pause, helper in DEPTH_FIXTURES]
