import json

import pytest
from jsonschema import Draft202012Validator

from creeper.errors import DanglingReferenceError, DuplicateIdError, FocusRequiredError, SpecSchemaError
from creeper.tvsim import (
    APP_SPEC_SCHEMA,
    EventKind,
    Key,
    derive_nav_from_grid,
    init_session,
    load_app_spec,
    parse_app_spec,
    press_key,
    reset_and_replay,
)
from helpers import FIXTURES


def minimal(**screen):
    base = {"id": "main", "widgets": [{"id": "a", "label": "A"}, {"id": "b", "label": "B"}]}
    base.update(screen)
    return {"name": "Mini", "rootScreen": "main", "screens": [base]}


def test_right_from_upcoming_reaches_top_rate(cinemup_spec):
    state = init_session(cinemup_spec)
    state, events = press_key(cinemup_spec, state, Key.RIGHT)
    assert state.focus == "top-rate"
    assert events[0].kind is EventKind.MOVED


def test_right_right_down_reaches_top_tv(cinemup_spec):
    state = reset_and_replay(cinemup_spec, [Key.RIGHT, Key.RIGHT, Key.DOWN])
    assert (state.screen, state.focus) == ("home", "top-tv")
    assert state.key_count == 3


def test_every_press_counts_and_logs(cinemup_spec):
    state = init_session(cinemup_spec)
    for key in [Key.UP, Key.BACK, Key.LEFT, Key.OK, Key.BACK, Key.BACK]:
        before = state
        state, events = press_key(cinemup_spec, state, key)
        assert state.key_count == before.key_count + 1
        assert len(state.log) == len(before.log) + len(events) and events


def test_back_restores_opener_focus(cinemup_spec):
    state = reset_and_replay(cinemup_spec, [Key.RIGHT, Key.RIGHT, Key.DOWN, Key.OK])
    assert (state.screen, state.focus) == ("movies", "poster-1")
    state, events = press_key(cinemup_spec, state, Key.BACK)
    assert events[0].kind is EventKind.CLOSED_SCREEN
    assert (state.screen, state.focus) == ("home", "top-tv")


def test_back_on_root_is_no_reaction(cinemup_spec):
    state, events = press_key(cinemup_spec, init_session(cinemup_spec), Key.BACK)
    assert events[0].kind is EventKind.NO_REACTION
    assert state.screen_stack == ("home",)


def test_terminal_action_fires_without_moving(cinemup_spec):
    state = reset_and_replay(cinemup_spec, [Key.OK, Key.OK])
    state, events = press_key(cinemup_spec, state, Key.OK)
    assert [e.kind for e in events] == [EventKind.ACTION_FIRED]
    assert events[0].detail == "play-trailer"
    assert (state.screen, state.focus) == ("details", "play-trailer")


def test_ok_without_effects_is_no_reaction(grid_spec):
    state = init_session(grid_spec, focus="v1")
    state, events = press_key(grid_spec, state, Key.OK)
    assert events[0].kind is EventKind.NO_REACTION
    assert state.focus == "v1"


def test_focus_is_required_without_initial_focus(grid_spec):
    with pytest.raises(FocusRequiredError):
        init_session(grid_spec)
    with pytest.raises(FocusRequiredError):
        init_session(grid_spec, focus="missing")
    assert init_session(grid_spec, focus="v5").focus == "v5"


def test_initial_focus_takes_precedence(cinemup_spec):
    assert init_session(cinemup_spec, focus="top-tv").focus == "upcoming"


def test_replay_is_deterministic(cinemup_spec):
    keys = [Key.DOWN, Key.RIGHT, Key.OK, Key.RIGHT, Key.OK, Key.BACK]
    assert reset_and_replay(cinemup_spec, keys) == reset_and_replay(cinemup_spec, keys)


def test_grid_hints_fill_missing_nav_only():
    spec = parse_app_spec(minimal(
        nav={"a": {"Right": "a"}},
        gridHints={"a": [0, 0], "b": [0, 1]},
    ))
    derived = derive_nav_from_grid(spec).root()
    assert derived.nav[("a", Key.RIGHT)] == "a"
    assert derived.nav[("b", Key.LEFT)] == "a"
    assert ("a", Key.DOWN) not in derived.nav


def test_grid_nav_uses_nearest_neighbour(grid_spec):
    nav = grid_spec.root().nav
    assert nav[("v1", Key.RIGHT)] == "v2"
    assert nav[("v3", Key.LEFT)] == "v2"
    assert nav[("v2", Key.DOWN)] == "v5"
    assert ("v3", Key.RIGHT) not in nav
    assert len(nav) == 14


@pytest.mark.parametrize("document, error", [
    (minimal(widgets=[{"id": "a"}, {"id": "a"}]), DuplicateIdError),
    (minimal(nav={"a": {"Right": "zz"}}), DanglingReferenceError),
    (minimal(nav={"a": {"OK": "b"}}), SpecSchemaError),
    (minimal(initialFocus="zz"), DanglingReferenceError),
    (minimal(widgets=[]), SpecSchemaError),
    (minimal(gridHints={"a": [0, 0], "b": [0, 0]}), SpecSchemaError),
    (minimal(widgets=[{"id": "a", "effects": [
        {"kind": "terminal-action", "argument": "x"},
        {"kind": "fetch-resource", "argument": "u"},
    ]}]), SpecSchemaError),
    (minimal(widgets=[{"id": "a", "effects": [{"kind": "open-screen", "argument": "nowhere"}]}]),
     DanglingReferenceError),
    (minimal(widgets=[{"id": "a", "kind": "action"}]), SpecSchemaError),
    ({"name": "Mini", "rootScreen": "other", "screens": minimal()["screens"]}, DanglingReferenceError),
])
def test_invalid_specs_are_rejected(document, error):
    with pytest.raises(error):
        parse_app_spec(document)


def test_schema_errors_carry_location():
    with pytest.raises(SpecSchemaError) as info:
        parse_app_spec(minimal(widgets=[{"id": "a", "effects": [{"kind": "teleport", "argument": "x"}]}]))
    assert info.value.location == "screens[0].widgets[0].effects[0].kind"


def test_malformed_json_is_a_schema_error():
    with pytest.raises(SpecSchemaError):
        load_app_spec("{not json")


def test_label_defaults_to_widget_id():
    spec = load_app_spec(json.dumps(minimal(widgets=[{"id": "solo"}])))
    assert spec.root().widget("solo").label == "solo"


@pytest.mark.parametrize("name", ["grid.json", "cinemup.json", "memory.json"])
def test_fixtures_follow_the_shipped_schema(name):
    document = json.loads((FIXTURES / name).read_text(encoding="utf-8"))
    Draft202012Validator.check_schema(APP_SPEC_SCHEMA)
    assert list(Draft202012Validator(APP_SPEC_SCHEMA).iter_errors(document)) == []


@pytest.mark.parametrize("document, location", [
    (minimal(widgets=[{"id": "a", "colour": "red"}]), "screens[0].widgets[0]"),
    (minimal(widgets=[{"id": "a", "effects": [{"kind": "bind-event", "argument": "x", "fatal": "yes"}]}]),
     "screens[0].widgets[0].effects[0].fatal"),
    (minimal(gridHints={"a": [0, True]}), "screens[0].gridHints.a[1]"),
    ({"name": "Mini", "screens": []}, "$"),
])
def test_schema_violations_are_located(document, location):
    with pytest.raises(SpecSchemaError, match="naruszenie schematu") as info:
        parse_app_spec(document)
    assert info.value.location == location
