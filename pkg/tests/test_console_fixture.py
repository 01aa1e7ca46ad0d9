"""Keeps the operator-console conformance fixture honest: it must regenerate
byte-identically from the live session, and replaying its edit messages
through apply_edit must land exactly on the displayed polylines."""

import importlib.util
import json
from pathlib import Path

import pytest

from cobot_cell.geometry import Point2, Polyline
from cobot_cell.planner import CutPlan, PlanEdit, apply_edit

REPO = Path(__file__).resolve().parents[1]
FIXTURE = REPO / "frontend" / "test" / "fixtures" / "session.json"


def _load_tool():
    spec = importlib.util.spec_from_file_location(
        "gen_console_fixture", REPO / "tools" / "gen_console_fixture.py"
    )
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


@pytest.fixture(scope="module")
def fixture_doc():
    return json.loads(FIXTURE.read_text())


def test_fixture_regenerates_identically(fixture_doc):
    tool = _load_tool()
    assert tool.build_fixture() == fixture_doc


def test_edit_messages_replay_through_apply_edit(fixture_doc):
    script = fixture_doc["script"]
    first_plan = next(
        e["msg"] for e in script
        if e["dir"] == "server" and e["msg"]["type"] == "plan_proposed"
    )
    plan = CutPlan(
        plan_id=first_plan["plan_id"],
        polylines=tuple(
            Polyline(Point2(x, y) for x, y in line)
            for line in first_plan["polylines"]
        ),
        image_size=(640, 480),
    )
    for entry in script:
        if entry["dir"] != "gesture":
            continue
        msg = entry["expect"]
        plan = apply_edit(
            plan,
            PlanEdit(
                op=msg["op"],
                index=msg["index"],
                point=(
                    Point2(*msg["point"]) if msg.get("point") is not None else None
                ),
            ),
        )
    displayed = fixture_doc["expected"]["final_polylines"]
    got = [[[p.x, p.y] for p in line.points] for line in plan.polylines]
    assert got == displayed
    assert plan.revision == fixture_doc["expected"]["final_revision"]


def test_every_gesture_expectation_is_an_edit(fixture_doc):
    for entry in fixture_doc["script"]:
        if entry["dir"] == "gesture":
            assert entry["expect"]["type"] == "edit"
            assert entry["expect"]["op"] in ("move", "add", "remove")


def test_led_sequence_contains_the_alert_red(fixture_doc):
    assert "red" in fixture_doc["expected"]["led_sequence"]
    assert fixture_doc["expected"]["assessment"]["alert"] is True
