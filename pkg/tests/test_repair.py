"""Tests for fix synthesis, injection and validation"""
import json
import time

import pytest

from shared.analysis import analyze
from shared.automata import DOUBLE_RELEASE, USE_AFTER_RELEASE
from shared.errors import NoReleaseCallbackImplemented, StaleFix
from shared.ir import CALL, OTHER, RELEASE_IF_HELD, RETURN, Statement, parse_app, serialize_app
from shared.repair import (
    INVALID,
    VALID,
    apply_fix,
    apply_fixes,
    check_fix,
    insertion_point,
    postdominator_chain,
    render_repair,
    render_reports,
    repair,
    synthesize_fix,
    synthesize_fixes,
    touching_procedures,
    unified_diff,
    validate,
)
from shared.oracle import depth_fixture
from shared.rfg import build_rfg, tracked_refs


def _statements(app, proc):
    return list(app.procedures[proc].blocks["b0"].statements)


def _late_use_app():
    """Pause callback whose last usage sits on a branch after the deepest post-dominator"""
    return parse_app(json.dumps({
        "app": "Branches",
        "components": [{
            "name": "PlayerActivity",
            "lifecycle": "activity",
            "callbacks": {"onCreate": "create", "onPause": "pausePlayer"},
            "fields": ["player"],
        }],
        "procedures": [
            {"name": "create", "entry": "b0", "blocks": [
                {"id": "b0", "statements": [{"op": "acquire", "api": "new", "target": "player"}, {"op": "return"}]},
            ]},
            {"name": "pausePlayer", "entry": "b0", "blocks": [
                {"id": "b0", "statements": [{"op": "other"}], "successors": ["b1"]},
                {"id": "b1", "statements": [{"op": "other"}], "successors": ["b2", "b3"]},
                {"id": "b2", "statements": [{"op": "use", "target": "player"}]},
                {"id": "b3", "statements": [{"op": "other"}]},
            ]},
        ],
    }))


# -- insertion points --------------------------------------------------------

def test_image_viewer_insertion_point(image_viewer, media_player):
    proc = image_viewer.procedures["onPause"]
    refs = tracked_refs(image_viewer, media_player)
    assert postdominator_chain(proc) == ["b0"]
    assert insertion_point(proc, media_player, refs, touching_procedures(image_viewer, media_player)) == ("b0", 2)


def test_insertion_after_last_usage(leak_free, media_player):
    proc = leak_free.procedures["onPause"]
    refs = tracked_refs(leak_free, media_player)
    touching = touching_procedures(leak_free, media_player)
    assert touching == {"onCreate", "onPause", "stopPlayback"}
    assert insertion_point(proc, media_player, refs, touching) == ("b0", 2)


def test_insertion_in_joining_block(two_leak, media_player):
    proc = two_leak.procedures["albumPause"]
    assert postdominator_chain(proc) == ["b0", "b2"]
    refs = tracked_refs(two_leak, media_player)
    assert insertion_point(proc, media_player, refs, touching_procedures(two_leak, media_player)) == ("b2", 0)


def test_no_insertion_point_when_usage_follows(media_player):
    app = _late_use_app()
    proc = app.procedures["pausePlayer"]
    assert postdominator_chain(proc) == ["b0", "b1"]
    refs = tracked_refs(app, media_player)
    assert insertion_point(proc, media_player, refs, touching_procedures(app, media_player)) is None


# -- synthesis and injection -------------------------------------------------

def test_image_viewer_fix(image_viewer, media_player):
    (fix,) = synthesize_fixes(analyze(image_viewer, media_player, 3), image_viewer, media_player)
    assert fix.location == ("onPause", "b0", 2)
    assert fix.release_op == "release"
    assert fix.target_ref == "player"
    assert fix.guarded is None
    assert fix.introduces_field is None
    assert fix.synthesized_procedure is None
    assert "onPause/b0[2]: if (player != null) player.release()" == fix.describe()

    patched = apply_fix(image_viewer, fix)
    assert _statements(patched, "onPause") == [
        Statement(OTHER),
        Statement(CALL, callee="super_onPause"),
        Statement(RELEASE_IF_HELD, api="release", target="player"),
        Statement(RETURN),
    ]
    assert patched.procedures["onCreate"] == image_viewer.procedures["onCreate"]
    assert image_viewer.procedures["onPause"].blocks["b0"].statements[2] == Statement(RETURN)
    assert analyze(patched, media_player, 3) == []
    assert validate(patched, media_player, 3).verdict == VALID


def test_fix_is_stale_once_applied(image_viewer, media_player):
    (fix,) = synthesize_fixes(analyze(image_viewer, media_player, 3), image_viewer, media_player)
    patched = apply_fix(image_viewer, fix)
    with pytest.raises(StaleFix):
        check_fix(patched, fix)
    with pytest.raises(StaleFix):
        apply_fix(patched, fix)


def test_fix_is_stale_when_acquire_moves(image_viewer, media_player, leak_free):
    (fix,) = synthesize_fixes(analyze(image_viewer, media_player, 3), image_viewer, media_player)
    with pytest.raises(StaleFix):
        check_fix(leak_free, fix)


def test_patched_app_serializes(image_viewer, media_player):
    result = repair(image_viewer, media_player, 3)
    assert parse_app(serialize_app(result.patched)) == result.patched


def test_wake_lock_fix_is_guarded(wake_lock):
    app = depth_fixture("single_release", wake_lock, ("acquire",), ("release",))
    reports = analyze(app, wake_lock, 3)
    (fix,) = synthesize_fixes(reports, app, wake_lock)
    assert fix.guarded == "isHeld"
    assert fix.location == ("onPause", "b0", 1)
    assert "isHeld()" in fix.describe()
    patched = apply_fixes(app, [fix])
    assert analyze(patched, wake_lock, 6) == []


def test_local_reference_gets_a_field(local_ref, media_player):
    (report,) = analyze(local_ref, media_player, 3)
    fields = {}
    fix = synthesize_fix(report, local_ref, media_player, fields)
    assert fix.introduces_field == "plumb_MediaPlayer_0"
    assert fix.target_ref == "plumb_MediaPlayer_0"
    assert fix.acquire_target == "mp"
    assert fields == {report.origin: "plumb_MediaPlayer_0"}
    # the same acquire reuses its field
    assert synthesize_fix(report, local_ref, media_player, fields).introduces_field == "plumb_MediaPlayer_0"

    patched = apply_fix(local_ref, fix)
    assert _statements(patched, "onCreate") == [
        Statement("acquire", api="new", target="plumb_MediaPlayer_0"),
        Statement(OTHER, api="alias", target="mp"),
        Statement("use", target="mp"),
        Statement(RETURN),
    ]
    assert _statements(patched, "onPause")[1] == Statement(RELEASE_IF_HELD, api="release", target="plumb_MediaPlayer_0")
    assert patched.component("RecordActivity").fields == ("plumb_MediaPlayer_0",)
    assert analyze(patched, media_player, 3) == []
    assert validate(patched, media_player, 3).valid


def test_fresh_field_avoids_existing_names(local_ref, media_player):
    doc = json.loads(serialize_app(local_ref))
    doc["components"][0]["fields"] = ["plumb_MediaPlayer_0"]
    app = parse_app(json.dumps(doc))
    (report,) = analyze(app, media_player, 3)
    assert synthesize_fix(report, app, media_player).introduces_field == "plumb_MediaPlayer_1"


def test_missing_callback_is_synthesized(two_leak, media_player):
    reports = analyze(two_leak, media_player, 3)
    slide = next(r for r in reports if r.component == "SlideActivity")
    fix = synthesize_fix(slide, two_leak, media_player)
    assert fix.synthesized_procedure == "plumb_SlideActivity_onPause"
    assert fix.location == ("plumb_SlideActivity_onPause", "b0", 0)
    assert fix.wraps is None
    with pytest.raises(NoReleaseCallbackImplemented):
        synthesize_fix(slide, two_leak, media_player, synthesize_missing=False)

    patched = apply_fix(two_leak, fix)
    assert patched.component("SlideActivity").callbacks["onPause"] == "plumb_SlideActivity_onPause"
    assert _statements(patched, "plumb_SlideActivity_onPause") == [
        Statement(RELEASE_IF_HELD, api="release", target="player"),
        Statement(RETURN),
    ]
    with pytest.raises(StaleFix):
        check_fix(patched, fix)


def test_late_usage_wraps_the_callback(media_player):
    app = _late_use_app()
    (report,) = analyze(app, media_player, 3)
    fix = synthesize_fix(report, app, media_player)
    assert fix.synthesized_procedure == "plumb_PlayerActivity_onPause"
    assert fix.wraps == "pausePlayer"
    assert fix.location == ("plumb_PlayerActivity_onPause", "b0", 1)

    patched = apply_fix(app, fix)
    assert patched.component("PlayerActivity").callbacks["onPause"] == "plumb_PlayerActivity_onPause"
    assert _statements(patched, "plumb_PlayerActivity_onPause") == [
        Statement(CALL, callee="pausePlayer"),
        Statement(RELEASE_IF_HELD, api="release", target="player"),
        Statement(RETURN),
    ]
    assert patched.procedures["pausePlayer"] == app.procedures["pausePlayer"]
    assert analyze(patched, media_player, 3) == []


def test_identical_fixes_merge(wake_lock):
    app = depth_fixture("double_acquire", wake_lock, ("acquire", "acquire"), ("release", "release"))
    reports = analyze(app, wake_lock, 3)
    assert len(reports) == 2
    assert len(synthesize_fixes(reports, app, wake_lock)) == 1


# -- validation --------------------------------------------------------------

def test_validate_reports_double_release(media_player):
    app = parse_app(json.dumps({
        "app": "Twice",
        "components": [{"name": "Main", "lifecycle": "activity",
                        "callbacks": {"onCreate": "create", "onPause": "pause"}, "fields": ["p"]}],
        "procedures": [
            {"name": "create", "entry": "b0", "blocks": [{"id": "b0", "statements": [
                {"op": "acquire", "api": "new", "target": "p"},
                {"op": "release", "api": "release", "target": "p"},
            ]}]},
            {"name": "pause", "entry": "b0", "blocks": [{"id": "b0", "statements": [
                {"op": "release", "api": "release", "target": "p"},
            ]}]},
        ],
    }))
    result = validate(app, media_player, 1)
    assert result.verdict == INVALID
    assert result.kinds() == [DOUBLE_RELEASE]
    (violation,) = result.violations
    assert violation.to_dict()["witness"] == ["s", "new", "release", "release", "f"]
    assert violation.to_dict()["trace"][3]["procedure"] == "pause"


def test_validate_rejects_depth_zero(image_viewer, media_player):
    with pytest.raises(ValueError):
        validate(image_viewer, media_player, 0)


def test_unpatched_leak_is_a_new_leak(image_viewer, media_player):
    result = validate(image_viewer, media_player, 3)
    assert result.kinds() == ["NewLeak"]


@pytest.mark.parametrize("depth", [1, 3, 5])
def test_resume_pause_pairing_is_valid(paired_player, media_player, depth):
    assert analyze(paired_player, media_player, depth) == []
    result = validate(paired_player, media_player, depth)
    assert result.valid
    assert result.verdict == VALID
    assert repair(paired_player, media_player, depth).fixes == []


# -- pipeline ----------------------------------------------------------------

def test_repair_image_viewer(image_viewer, media_player):
    result = repair(image_viewer, media_player, 3)
    assert len(result.fixes) == 1
    assert result.all_valid
    assert result.residual == []
    assert result.errors == []
    bundle = result.to_bundle()
    assert bundle["fixes"][0]["validation"]["verdict"] == VALID
    assert bundle["fixes"][0]["location"] == {"procedure": "onPause", "block": "b0", "index": 2}
    assert bundle["patched_app"]["app"] == "ImageViewer"
    assert bundle["residual_leaks"] == []


def test_repair_without_validation(image_viewer, media_player):
    result = repair(image_viewer, media_player, 3, validate_flag=False)
    assert result.validations == {}
    assert result.to_bundle()["fixes"][0]["validation"] is None


def test_voice_message_early_fix_double_releases(voice_message, media_player):
    result = repair(voice_message, media_player, 3, release_policy="early")
    (fix,) = result.fixes
    assert fix.location == ("onPause", "b0", 1)
    assert not result.all_valid
    assert result.invalid_fixes() == [fix]
    assert result.validation_of(fix).kinds() == [DOUBLE_RELEASE]
    violation = result.validation_of(fix).violations[0]
    assert violation.callback_sequence[-1] == "onStop"
    assert "DoubleRelease" in render_repair(result)


def test_voice_message_late_needs_no_fix(voice_message, media_player):
    result = repair(voice_message, media_player, 3, release_policy="late")
    assert result.fixes == []
    assert result.all_valid
    assert result.patched is voice_message
    assert render_repair(result) == "No leaks found; app unchanged."


def test_two_components_repaired(two_leak, media_player):
    result = repair(two_leak, media_player, 1)
    assert [f.component for f in result.fixes] == ["AlbumActivity", "SlideActivity"]
    assert result.all_valid
    assert result.residual == []


def test_repeated_pause_uses_released_player(two_leak, media_player):
    result = repair(two_leak, media_player, 3)
    album, slide = result.fixes
    assert result.validation_of(album).kinds() == [USE_AFTER_RELEASE]
    assert result.validation_of(slide).valid
    assert result.invalid_fixes() == [album]


def test_unfixable_leak_is_recorded(two_leak, media_player, monkeypatch):
    from shared.repair import pipeline

    def refuse(report, app, spec, fields=None):
        return synthesize_fix(report, app, spec, fields, synthesize_missing=False)

    monkeypatch.setattr(pipeline, "synthesize_fix", refuse)
    result = pipeline.repair(two_leak, media_player, 1)
    assert [f.component for f in result.fixes] == ["AlbumActivity"]
    (error,) = result.errors
    assert error["type"] == "NoReleaseCallbackImplemented"
    assert [r.component for r in result.residual] == ["SlideActivity"]
    assert "! NoReleaseCallbackImplemented" in render_repair(result)


# -- rendering ---------------------------------------------------------------

def test_render_reports(image_viewer, media_player):
    assert render_reports([]) == "No leaks found."
    text = render_reports(analyze(image_viewer, media_player, 3))
    assert text.startswith("1 leak(s) found:")
    assert "onCreate/b0[0]" in text


def test_unified_diff_shows_inserted_release(image_viewer, media_player):
    result = repair(image_viewer, media_player, 3)
    diff = unified_diff(image_viewer, result.patched)
    added = [line for line in diff.splitlines() if line.startswith("+") and not line.startswith("+++")]
    assert "release_if_held release (player)" in added[0]
    assert unified_diff(image_viewer, image_viewer) == ""


# -- scale -------------------------------------------------------------------

@pytest.mark.slow
def test_large_flow_graph_repairs_within_a_minute(wake_lock):
    track_change = ("acquire", "release") * 1250 + ("acquire",)
    pause = ("release",) + ("acquire", "release") * 1250
    app = depth_fixture("bulk", wake_lock, track_change, pause)
    assert sum(len(build_rfg(proc, wake_lock)) for proc in app.procedures.values()) >= 5000

    started = time.perf_counter()
    reports = analyze(app, wake_lock, 3)
    result = repair(app, wake_lock, 3)
    elapsed = time.perf_counter() - started

    assert reports
    assert result.fixes and not result.errors
    assert result.residual == []
    assert set(result.validations) == {fix.key for fix in result.fixes}
    assert elapsed < 60
