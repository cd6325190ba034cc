"""Tests for leak detection over procedures, call graphs and unrolled lifecycles"""
import json

import pytest

from shared.analysis import (
    all_calls,
    analyze,
    analyze_app,
    call_dag,
    choose_release_callback,
    invoked_release_callbacks,
    leaking_paths,
    may_leak,
    unroll_callbacks,
    unroll_lifecycle,
)
from shared.automata.resource import plain
from shared.errors import CycleWarning, NoReleaseCallback
from shared.ir import ACTIVITY, parse_app
from shared.oracle import LOOPING, depth_fixture, depth_fixtures, generate_corpus
from shared.rfg import build_rfg

PAUSE_ONLY = ("onCreate", "onStart", "onResume", "onPause")


def _calls_app(procedures, callbacks=None, lifecycles=None):
    doc = {
        "app": "Calls",
        "components": [{
            "name": "Main",
            "lifecycle": "activity",
            "callbacks": callbacks or {"onCreate": procedures[0]["name"]},
            "fields": ["lock"],
        }],
        "procedures": procedures,
    }
    if lifecycles:
        doc["lifecycles"] = lifecycles
    return parse_app(json.dumps(doc))


def _proc(name, *statements):
    return {"name": name, "entry": "b0", "blocks": [{"id": "b0", "statements": list(statements)}]}


def _keys(reports):
    return {(r.component, r.origin) for r in reports}


# -- unrolling ---------------------------------------------------------------

def test_unroll_depth_one_has_single_path():
    assert unroll_lifecycle(ACTIVITY, ["onPause"], 1) == [PAUSE_ONLY]


def test_unroll_depth_two_repeats_pause_resume():
    sequences = unroll_lifecycle(ACTIVITY, ["onPause"], 2)
    assert PAUSE_ONLY in sequences
    assert PAUSE_ONLY + ("onResume", "onPause") in sequences
    assert len(sequences) == 2


def test_unroll_truncates_only_the_last_edge():
    sequences = unroll_lifecycle(ACTIVITY, ["onStop"], 2)
    assert ("onCreate", "onStart", "onResume", "onPause", "onStop") in sequences
    assert ("onCreate", "onStart", "onResume", "onPause", "onResume", "onPause", "onStop") in sequences
    assert all(s[-1] == "onStop" for s in sequences)


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_unrolled_sequences_grow_with_depth(depth):
    smaller = set(unroll_lifecycle(ACTIVITY, ["onPause", "onStop"], depth))
    larger = set(unroll_lifecycle(ACTIVITY, ["onPause", "onStop"], depth + 1))
    assert smaller <= larger


def test_unroll_rejects_depth_zero():
    with pytest.raises(ValueError):
        unroll_lifecycle(ACTIVITY, ["onPause"], 0)


def test_unroll_looping_lifecycle():
    assert unroll_lifecycle(LOOPING, ["onPause"], 3) == [
        ("onCreate", "onPause"),
        ("onCreate", "onTrackChange", "onPause"),
        ("onCreate", "onTrackChange", "onTrackChange", "onPause"),
    ]


def test_release_callback_choice(image_viewer, voice_message, two_leak, media_player):
    assert invoked_release_callbacks(media_player, ACTIVITY) == ["onPause", "onStop"]
    viewer = image_viewer.component("ImageViewerActivity")
    assert choose_release_callback(viewer, media_player, ACTIVITY, "late") == "onPause"
    voice = voice_message.component("VoiceMessageActivity")
    assert choose_release_callback(voice, media_player, ACTIVITY, "early") == "onPause"
    assert choose_release_callback(voice, media_player, ACTIVITY, "late") == "onStop"
    slides = two_leak.component("SlideActivity")
    assert choose_release_callback(slides, media_player, ACTIVITY, "late") == "onStop"


def test_no_release_callback(media_player):
    lifecycles = [{"name": "oneshot", "states": ["A", "B"], "initial": "A",
                   "edges": [{"from": "A", "to": "B", "callbacks": ["onCreate"]}]}]
    doc = {
        "app": "OneShot",
        "lifecycles": lifecycles,
        "components": [{"name": "Main", "lifecycle": "oneshot", "callbacks": {"onCreate": "create"}}],
        "procedures": [_proc("create", {"op": "acquire", "api": "new", "target": "p"}, {"op": "return"})],
    }
    app = parse_app(json.dumps(doc))
    with pytest.raises(NoReleaseCallback):
        unroll_callbacks(app.components[0], media_player, 3, app.lifecycles)
    # the component is skipped, not fatal
    assert analyze(app, media_player, 3) == []


# -- intra and inter-procedural ----------------------------------------------

def test_matched_pair_does_not_leak(media_player):
    app = _calls_app([_proc("create",
                            {"op": "acquire", "api": "new", "target": "p"},
                            {"op": "release", "api": "release", "target": "p"})])
    rfg = build_rfg(app.procedures["create"], media_player)
    assert not may_leak(rfg, media_player)
    assert leaking_paths(rfg, media_player) == []


def test_loop_acquiring_twice_needs_a_stack(wake_lock):
    doc = {
        "app": "Loop",
        "components": [{"name": "Main", "lifecycle": "activity", "callbacks": {"onCreate": "spin"}}],
        "procedures": [{
            "name": "spin",
            "entry": "b0",
            "blocks": [
                {"id": "b0", "statements": [
                    {"op": "acquire", "api": "acquire", "target": "lock"},
                    {"op": "acquire", "api": "acquire", "target": "lock"},
                    {"op": "release", "api": "release", "target": "lock"},
                ], "successors": ["b0", "b1"]},
                {"id": "b1", "statements": [{"op": "release", "api": "release", "target": "lock"}, {"op": "return"}]},
            ],
        }],
    }
    app = parse_app(json.dumps(doc))
    (witness,) = leaking_paths(build_rfg(app.procedures["spin"], wake_lock), wake_lock)
    assert [plain(s) for s in witness.symbols].count("acquire") == 4


def test_callee_release_resolves_caller_leak(wake_lock):
    app = _calls_app([
        _proc("create", {"op": "acquire", "api": "acquire", "target": "lock"}, {"op": "call", "callee": "cleanup"}),
        _proc("cleanup", {"op": "release", "api": "release", "target": "lock"}, {"op": "return"}),
    ])
    summaries = all_calls(app, wake_lock)
    assert summaries["create"].leak_free
    assert summaries["cleanup"].leak_free


def test_leaking_callee_is_summarized(wake_lock):
    app = _calls_app([
        _proc("create", {"op": "other"}, {"op": "call", "callee": "grab"}),
        _proc("grab", {"op": "acquire", "api": "acquire", "target": "lock"}),
    ])
    summaries = all_calls(app, wake_lock)
    assert not summaries["grab"].leak_free
    assert not summaries["create"].leak_free
    (witness,) = summaries["create"].leaking_paths
    assert witness.provenance[1].origin == ("grab", "b0", 0)


def test_recursion_is_broken_with_a_warning(wake_lock):
    app = _calls_app([
        _proc("create", {"op": "acquire", "api": "acquire", "target": "lock"}, {"op": "call", "callee": "create"}),
    ])
    dag, removed = call_dag(app)
    assert removed == [CycleWarning("create", "create")]
    assert not dag.has_edge("create", "create")
    with pytest.warns(CycleWarning):
        all_calls(app, wake_lock)
    result = analyze_app(app, wake_lock, 2)
    assert result.warnings == [CycleWarning("create", "create")]
    assert result.to_dict()["warnings"] == [{"kind": "CycleWarning", "caller": "create", "callee": "create"}]


def test_cycle_breaking_removes_smallest_back_edge():
    app = _calls_app([
        _proc("a", {"op": "call", "callee": "z"}, {"op": "call", "callee": "b"}),
        _proc("b", {"op": "call", "callee": "c"}),
        _proc("c", {"op": "call", "callee": "b"}),
        _proc("z", {"op": "call", "callee": "a"}),
    ])
    dag, removed = call_dag(app)
    # (a, z) and (b, c) close their cycles but are tree edges of the search
    assert removed == [CycleWarning("c", "b"), CycleWarning("z", "a")]
    assert dag.has_edge("a", "z") and dag.has_edge("b", "c")


# -- whole apps --------------------------------------------------------------

def test_image_viewer_leak(image_viewer, media_player):
    (report,) = analyze(image_viewer, media_player, 3)
    assert report.component == "ImageViewerActivity"
    assert report.origin == ("onCreate", "b0", 0)
    assert report.release_callback == "onPause"
    assert report.callback_sequence == PAUSE_ONLY
    assert [plain(s) for s in report.witness.symbols] == ["s", "new", "f"]
    doc = report.to_dict()
    assert doc["witness"] == ["s", "new", "f"]
    assert doc["acquire"] == {"procedure": "onCreate", "block": "b0", "index": 0}
    assert "onPause" in report.describe()


def test_leak_free_app(leak_free, media_player):
    assert analyze(leak_free, media_player, 3) == []


def test_two_components(two_leak, media_player):
    reports = analyze(two_leak, media_player, 3)
    assert [(r.component, r.origin, r.release_callback) for r in reports] == [
        ("AlbumActivity", ("albumCreate", "b0", 0), "onPause"),
        ("SlideActivity", ("slideCreate", "b0", 0), "onPause"),
    ]


def test_release_policy_changes_target(voice_message, media_player):
    (report,) = analyze(voice_message, media_player, 3, release_policy="early")
    assert report.release_callback == "onPause"
    assert analyze(voice_message, media_player, 3, release_policy="late") == []


def test_analysis_rejects_depth_zero(image_viewer, media_player):
    with pytest.raises(ValueError):
        analyze(image_viewer, media_player, 0)


@pytest.mark.parametrize("name, first_depth", [
    ("unreleased", 2),
    ("single_release", 3),
    ("net_one", 3),
    ("double_acquire", 3),
    ("helper_unreleased", 2),
    ("helper_single_release", 3),
])
def test_depth_fixtures(wake_lock, name, first_depth):
    app = next(a for a in depth_fixtures(wake_lock) if a.name == name)
    for depth in range(1, 7):
        found = analyze(app, wake_lock, depth)
        assert bool(found) == (depth >= first_depth), depth


def test_double_acquire_blames_both_sites(wake_lock):
    app = depth_fixture("double_acquire", wake_lock, ("acquire", "acquire"), ("release", "release"))
    origins = {r.origin for r in analyze(app, wake_lock, 3)}
    assert origins == {("onTrackChange", "b0", 0), ("onTrackChange", "b0", 1)}


def test_guarded_release_drains_every_level(wake_lock):
    app = depth_fixture("guarded", wake_lock, ("acquire",), ("release_if_held",))
    assert analyze(app, wake_lock, 5) == []


def test_depth_monotonicity_on_corpus(wifi_lock):
    for app in generate_corpus(11, 8, wifi_lock):
        previous = set()
        for depth in range(1, 5):
            current = _keys(analyze(app, wifi_lock, depth))
            assert previous <= current, (app.name, depth)
            previous = current


def test_workers_do_not_change_reports(media_player):
    for app in generate_corpus(3, 5, media_player):
        assert analyze(app, media_player, 3, max_workers=4) == analyze(app, media_player, 3, max_workers=1)


def test_reports_are_deterministic(two_leak, media_player):
    first = json.dumps(analyze_app(two_leak, media_player, 3).to_dict())
    second = json.dumps(analyze_app(two_leak, media_player, 3).to_dict())
    assert first == second
