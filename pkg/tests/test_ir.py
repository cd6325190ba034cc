"""Tests for the IR model, its JSON encoding and resource specs"""
import json

import pytest

from shared.errors import SchemaError, ValidationError
from shared.ir import (
    ACTIVITY,
    AppModel,
    list_bundled,
    load_bundled,
    load_resource,
    parse_app,
    parse_resource_spec,
    resolve_lifecycle,
    resource_spec_to_dict,
    serialize_app,
)
from tests.conftest import fixture_path


def _doc(**overrides):
    doc = {
        "app": "Tiny",
        "components": [{"name": "Main", "lifecycle": "activity", "callbacks": {"onCreate": "create"}}],
        "procedures": [
            {"name": "create", "entry": "b0", "blocks": [{"id": "b0", "statements": [{"op": "return"}]}]},
        ],
    }
    doc.update(overrides)
    return json.dumps(doc)


def test_parse_image_viewer(image_viewer):
    assert image_viewer.name == "ImageViewer"
    comp = image_viewer.component("ImageViewerActivity")
    assert comp.fields == ("player",)
    assert comp.callbacks == {"onCreate": "onCreate", "onPause": "onPause"}
    assert image_viewer.statement_at(("onCreate", "b0", 0)).api == "new"
    assert sorted(image_viewer.procedures) == ["onCreate", "onPause"]


def test_external_callees_are_not_in_call_graph(image_viewer):
    assert image_viewer.external_callees == frozenset({"super_onPause"})
    assert image_viewer.call_graph["onPause"] == frozenset()


def test_serialize_parses_back(two_leak):
    again = parse_app(serialize_app(two_leak))
    assert again == two_leak


def test_accepts_bytes():
    with open(fixture_path("image_viewer"), "rb") as fh:
        app = parse_app(fh.read())
    assert isinstance(app, AppModel)


def test_malformed_json():
    with pytest.raises(SchemaError):
        parse_app("{not json")


def test_invalid_utf8_is_schema_error():
    with pytest.raises(SchemaError, match="UTF-8"):
        parse_app(b'{"app": "\xff\xfe"}')


def test_missing_app_name():
    with pytest.raises(SchemaError):
        parse_app(json.dumps({"components": []}))


def test_unknown_statement_op():
    procedures = [{"name": "create", "entry": "b0", "blocks": [{"id": "b0", "statements": [{"op": "jump"}]}]}]
    with pytest.raises(SchemaError):
        parse_app(_doc(procedures=procedures))


def test_acquire_needs_target():
    stmt = {"op": "acquire", "api": "new"}
    procedures = [{"name": "create", "entry": "b0", "blocks": [{"id": "b0", "statements": [stmt]}]}]
    with pytest.raises(SchemaError):
        parse_app(_doc(procedures=procedures))


def test_dangling_successor():
    blocks = [{"id": "b0", "statements": [], "successors": ["b9"]}]
    with pytest.raises(ValidationError) as info:
        parse_app(_doc(procedures=[{"name": "create", "entry": "b0", "blocks": blocks}]))
    assert info.value.entity == "b9"


def test_unreachable_block():
    blocks = [{"id": "b0", "statements": [{"op": "return"}]}, {"id": "b1", "statements": []}]
    with pytest.raises(ValidationError) as info:
        parse_app(_doc(procedures=[{"name": "create", "entry": "b0", "blocks": blocks}]))
    assert info.value.entity == "b1"


def test_duplicate_procedure():
    proc = {"name": "create", "entry": "b0", "blocks": [{"id": "b0", "statements": []}]}
    with pytest.raises(ValidationError):
        parse_app(_doc(procedures=[proc, proc]))


def test_callback_names_missing_procedure():
    components = [{"name": "Main", "lifecycle": "activity", "callbacks": {"onCreate": "nowhere"}}]
    with pytest.raises(ValidationError):
        parse_app(_doc(components=components))


def test_unknown_lifecycle():
    components = [{"name": "Main", "lifecycle": "service", "callbacks": {}}]
    with pytest.raises(ValidationError):
        parse_app(_doc(components=components))


def test_custom_lifecycle_takes_precedence():
    lifecycles = [{
        "name": "activity",
        "states": ["A", "B"],
        "initial": "A",
        "edges": [{"from": "A", "to": "B", "callbacks": ["onCreate", "onPause"]}],
    }]
    app = parse_app(_doc(lifecycles=lifecycles))
    graph = resolve_lifecycle("activity", app.lifecycles)
    assert graph.states == ("A", "B")
    assert resolve_lifecycle("activity") is ACTIVITY


def test_activity_lifecycle_callbacks():
    assert ACTIVITY.callbacks() == {"onCreate", "onStart", "onResume", "onPause", "onStop", "onDestroy"}
    assert [e.target for e in ACTIVITY.out_edges("Running")] == ["Running", "Closed"]


def test_bundled_resources():
    names = list_bundled()
    assert {"MediaPlayer", "WakeLock", "WifiLock", "Camera"} <= set(names)
    for name in names:
        spec = load_bundled(name)
        assert spec.name == name
        assert spec.release_callbacks


def test_media_player_spec(media_player):
    assert media_player.acquire_ops == ("new", "start")
    assert media_player.release_ops == ("release", "stop")
    assert media_player.matches("new", "release")
    assert not media_player.matches("new", "stop")
    assert media_player.release_for("start") == "stop"
    assert not media_player.reentrant


def test_wake_lock_spec(wake_lock):
    assert wake_lock.reentrant
    assert wake_lock.held_check == "isHeld"


def test_unknown_bundled_resource():
    with pytest.raises(SchemaError):
        load_bundled("Teleporter")


def test_load_resource_from_file(tmp_path, media_player):
    path = tmp_path / "player.json"
    path.write_text(json.dumps(resource_spec_to_dict(media_player)), encoding="utf-8")
    assert load_resource(str(path)) == media_player
    assert load_resource("MediaPlayer") == media_player


@pytest.mark.parametrize("document", [
    {"resource": "R", "reentrant": False, "pairs": [], "release_callbacks": ["onPause"]},
    {"resource": "R", "reentrant": False, "pairs": [["a", "r"], ["a", "r"]], "release_callbacks": ["onPause"]},
    {"resource": "R", "reentrant": False, "pairs": [["a", "a"]], "release_callbacks": ["onPause"]},
    {"resource": "R", "reentrant": False, "pairs": [["s", "r"]], "release_callbacks": ["onPause"]},
    {"resource": "R", "reentrant": False, "pairs": [["a", "r"]], "release_callbacks": []},
])
def test_invalid_resource_specs(document):
    with pytest.raises(ValidationError):
        parse_resource_spec(json.dumps(document))


@pytest.mark.parametrize("op", ["s", "f", "use", "?release", "*acquire"])
def test_reserved_operation_names(op):
    document = {"resource": "R", "pairs": [[op, "r"]], "release_callbacks": ["onPause"]}
    with pytest.raises(ValidationError, match="reserved"):
        parse_resource_spec(json.dumps(document))


def test_operation_cannot_both_acquire_and_release():
    document = {"resource": "R", "pairs": [["open", "close"], ["close", "reset"]], "release_callbacks": ["onPause"]}
    with pytest.raises(ValidationError, match="'close' is both an acquire and a release") as info:
        parse_resource_spec(json.dumps(document))
    assert info.value.entity == "close"


def test_resource_spec_schema_errors():
    with pytest.raises(SchemaError):
        parse_resource_spec(json.dumps({"resource": "R", "reentrant": "yes", "pairs": [["a", "r"]]}))
    with pytest.raises(SchemaError):
        parse_resource_spec(json.dumps({"resource": "R", "pairs": [["a"]], "release_callbacks": ["onPause"]}))
