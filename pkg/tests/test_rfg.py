import json
from collections import Counter

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shared.analysis import leaking_paths_by_origin
from shared.ir import ACQUIRE, CALL, RELEASE, RELEASE_IF_HELD, RETURN, load_bundled, parse_app
from shared.oracle import generate_corpus
from shared.rfg import (
    ACQUIRE_NODE,
    EXIT_NODE,
    RELEASE_NODE,
    TRANSFER_NODE,
    TRIVIAL_NODE,
    USE_NODE,
    app_stats,
    build_path_graph,
    build_rfg,
    cfg_graph,
    chain,
    cyclomatic,
    is_neutral,
    procedure_stats,
    rfg_to_dot,
    series_reduce,
    splice_out,
    stats_document,
    tracked_refs,
)


def _app(blocks):
    return parse_app(json.dumps({
        "app": "Branchy",
        "components": [{"name": "Main", "lifecycle": "activity", "callbacks": {"onCreate": "work"}}],
        "procedures": [{"name": "work", "entry": "b0", "blocks": blocks}],
    }))


def _branchy():
    return _app([
        {"id": "b0", "statements": [{"op": "acquire", "api": "new", "target": "p"}], "successors": ["b1", "b2"]},
        {"id": "b1", "statements": [{"op": "other"}], "successors": ["b3"]},
        {"id": "b2", "statements": [{"op": "use", "target": "p"}], "successors": ["b3"]},
        {"id": "b3", "statements": [{"op": "release", "api": "release", "target": "p"}, {"op": "return"}]},
    ])


def _labels(rfg):
    return sorted(n.label() for n in rfg.nodes)


def test_image_viewer_callbacks(image_viewer, media_player):
    create = build_rfg(image_viewer.procedures["onCreate"], media_player)
    assert _labels(create) == ["acquire:new", "f", "s"]
    assert len(create.edges) == 2
    (acquire,) = create.nodes_of_kind(ACQUIRE_NODE)
    assert acquire.origin == ("onCreate", "b0", 0)
    assert create.successors(acquire) == [create.exit]

    pause = build_rfg(image_viewer.procedures["onPause"], media_player)
    (call,) = pause.nodes_of_kind(TRANSFER_NODE)
    assert call.callee == "super_onPause"


def test_statements_after_return_are_dropped(media_player):
    app = _app([{"id": "b0", "statements": [{"op": "return"}, {"op": "acquire", "api": "new", "target": "p"}]}])
    rfg = build_rfg(app.procedures["work"], media_player)
    assert not rfg.nodes_of_kind(ACQUIRE_NODE)
    assert rfg.successors(rfg.entry) == [rfg.exit]


def test_uses_only_in_validation_mode(media_player):
    proc = _branchy().procedures["work"]
    assert not build_rfg(proc, media_player).nodes_of_kind(USE_NODE)
    assert len(build_rfg(proc, media_player, track_uses=True).nodes_of_kind(USE_NODE)) == 1
    assert not build_rfg(proc, media_player, track_uses=True, uses_of=frozenset({"q"})).nodes_of_kind(USE_NODE)


def test_operations_of_other_resources_are_ignored(wake_lock):
    rfg = build_rfg(_branchy().procedures["work"], wake_lock)
    assert not rfg.nodes_of_kind(ACQUIRE_NODE)
    assert [n.op for n in rfg.nodes_of_kind(RELEASE_NODE)] == ["release"]


def test_guarded_release_node(leak_free, media_player):
    rfg = build_rfg(leak_free.procedures["stopPlayback"], media_player)
    (release,) = rfg.nodes_of_kind(RELEASE_NODE)
    assert release.guarded
    assert release.label() == "release:?stop"


def test_tracked_refs(local_ref, media_player):
    assert tracked_refs(local_ref, media_player) == frozenset({"mp"})


def test_series_reduction_lowers_complexity(media_player):
    rfg = build_rfg(_branchy().procedures["work"], media_player)
    assert cyclomatic(rfg) == 2
    reduced = series_reduce(rfg, is_neutral)
    assert cyclomatic(reduced) == 1
    assert _labels(reduced) == ["acquire:new", "f", "release:release", "s"]


def test_splice_out_keeps_resource_sequences(image_viewer, media_player):
    rfg = build_rfg(image_viewer.procedures["onPause"], media_player)
    spliced = splice_out(rfg, is_neutral)
    assert spliced.successors(spliced.entry) == [spliced.exit]


def test_chain_joins_parts(image_viewer, media_player):
    parts = [build_rfg(image_viewer.procedures[name], media_player) for name in ("onCreate", "onPause")]
    combined = chain(parts, name="seq")
    assert len(combined.nodes_of_kind(ACQUIRE_NODE)) == 1
    assert combined.entry.node_id == "seq:s"
    # parts are renamed so the same procedure can appear twice
    twice = chain([parts[0], parts[0]], name="twice")
    assert len(twice.nodes_of_kind(ACQUIRE_NODE)) == 2


def test_procedure_stats(media_player):
    stats = procedure_stats(_branchy().procedures["work"], media_player)
    # four blocks plus the virtual exit
    assert stats["cfg_nodes"] == 5
    assert stats["cfg_edges"] == 5
    assert stats["cfg_m"] == stats["cfg_edges"] - stats["cfg_nodes"] + 2 == 2
    assert stats["rfg_m"] == 1
    assert stats["ratio"] == 0.5


def test_app_stats_total_row(two_leak, media_player):
    frame = app_stats(two_leak, media_player)
    assert list(frame["procedure"]) == ["albumCreate", "albumPause", "slideCreate", "<Gallery>"]
    total = frame.iloc[-1]
    assert total["cfg_m"] == frame.iloc[:-1]["cfg_m"].sum()
    doc = stats_document(two_leak, media_player)
    assert doc["total"]["procedure"] == "<Gallery>"
    assert len(doc["procedures"]) == 3


def test_dot_output(image_viewer, media_player):
    dot = rfg_to_dot(build_rfg(image_viewer.procedures["onCreate"], media_player))
    assert dot.startswith("digraph onCreate {")
    assert 'label="acquire:new"' in dot
    assert " -> " in dot
    assert dot.rstrip().endswith("}")


def test_dot_escapes_angle_bracket_names(media_player):
    app = _app([{"id": "b0", "statements": [{"op": "call", "callee": "<init>"}, {"op": "return"}]}])
    dot = rfg_to_dot(build_rfg(app.procedures["work"], media_player))
    assert 'label="transfer:<init>"' in dot


def test_path_graph_keeps_relevant_statements_in_order(image_viewer, media_player):
    block = image_viewer.procedures["onCreate"].block("b0")
    nodes = build_path_graph(block, media_player, proc_name="onCreate")
    assert [n.kind for n in nodes] == [ACQUIRE_NODE, EXIT_NODE]
    assert [n.node_id for n in nodes] == ["onCreate/b0/0", "onCreate/b0/2"]


def test_path_graph_of_irrelevant_block_is_trivial(media_player):
    block = _branchy().procedures["work"].block("b1")
    (node,) = build_path_graph(block, media_player, proc_name="work")
    assert node.kind == TRIVIAL_NODE
    assert node.node_id == "work/b1/~"


# -- abstraction properties over generated procedures ----------------------

CORPUS_RESOURCES = ["MediaPlayer", "WakeLock"]
RELEVANT_OPS = (ACQUIRE, RELEASE, RELEASE_IF_HELD, CALL, RETURN)


def _generated_procedures(resource, seed):
    spec = load_bundled(resource)
    (app,) = generate_corpus(seed, 1, spec)
    return spec, list(app.procedures.values())


def _cfg_sequences(proc, spec):
    """Acquire/release sequences along every entry-to-exit path of an acyclic CFG"""
    found = Counter()
    stack = [(proc.entry, ())]
    while stack:
        block_id, prefix = stack.pop()
        block = proc.block(block_id)
        ops, returned = [], False
        for stmt in block.statements:
            if stmt.op == RETURN:
                returned = True
                break
            if stmt.op == ACQUIRE and spec.is_acquire(stmt.api):
                ops.append((ACQUIRE_NODE, stmt.api, False))
            elif stmt.op in (RELEASE, RELEASE_IF_HELD) and spec.is_release(stmt.api):
                ops.append((RELEASE_NODE, stmt.api, stmt.op == RELEASE_IF_HELD))
        sequence = prefix + tuple(ops)
        if returned or not block.successors:
            found[sequence] += 1
        else:
            stack.extend((succ, sequence) for succ in block.successors)
    return found


def _rfg_sequences(rfg):
    found = Counter()
    for path in nx.all_simple_paths(rfg.graph, rfg.entry, rfg.exit):
        found[tuple((n.kind, n.op, n.guarded) for n in path if n.kind in (ACQUIRE_NODE, RELEASE_NODE))] += 1
    return found


@pytest.mark.parametrize("resource", CORPUS_RESOURCES)
@given(seed=st.integers(min_value=0, max_value=100_000))
@settings(max_examples=60, deadline=None)
def test_rfg_node_count_bound(resource, seed):
    spec, procedures = _generated_procedures(resource, seed)
    for proc in procedures:
        relevant = sum(1 for _, stmt in proc.statements() if stmt.op in RELEVANT_OPS)
        assert len(build_rfg(proc, spec)) <= relevant + len(proc.blocks) + 2


@pytest.mark.parametrize("resource", CORPUS_RESOURCES)
@given(seed=st.integers(min_value=0, max_value=100_000))
@settings(max_examples=60, deadline=None)
def test_rfg_preserves_acyclic_path_language(resource, seed):
    spec, procedures = _generated_procedures(resource, seed)
    for proc in procedures:
        if not nx.is_directed_acyclic_graph(cfg_graph(proc)):
            continue
        expected = _cfg_sequences(proc, spec)
        actual = _rfg_sequences(build_rfg(proc, spec))
        assert set(actual) == set(expected)
        # blocks that only return leave no node behind; siblings of that kind share one edge into f
        merged = any(
            [n.kind for n in build_path_graph(block, spec, proc_name=proc.name)] == [EXIT_NODE]
            for block in proc.blocks.values()
        )
        if not merged:
            assert actual == expected


@pytest.mark.parametrize("resource", CORPUS_RESOURCES)
@given(seed=st.integers(min_value=0, max_value=100_000), data=st.data())
@settings(max_examples=60, deadline=None)
def test_deleting_trivial_nodes_keeps_leak_verdict(resource, seed, data):
    spec, procedures = _generated_procedures(resource, seed)
    for proc in procedures:
        rfg = build_rfg(proc, spec)
        trivial = sorted(rfg.nodes_of_kind(TRIVIAL_NODE), key=lambda n: n.node_id)
        if not trivial:
            continue
        target = data.draw(st.sampled_from(trivial))
        reduced = splice_out(rfg, lambda n: n == target)
        assert target not in reduced.graph
        before = {o: w.symbols for o, w in leaking_paths_by_origin(rfg, spec).items()}
        after = {o: w.symbols for o, w in leaking_paths_by_origin(reduced, spec).items()}
        assert after == before
