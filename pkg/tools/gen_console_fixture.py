"""Generate the operator-console conformance fixture.

Drives a real scripted wire session (propose, three edits, approve, state
stream, alert, inspection clear, plus a stale-revision approve) and records
every message crossing the wire. The edits flow through the supervisor's
apply_edit path, so the per-step polylines in the fixture are the authority
the console must reproduce.
"""

import json
from pathlib import Path

from cobot_cell.harness import demo_trim_drag_scenario
from cobot_cell.supervisor import Mode
from cobot_cell.wire import WireSession

OUT = Path(__file__).resolve().parents[1] / "frontend" / "test" / "fixtures"


def pump_until(session, script, mtype, budget=30.0, dt=0.05, state=None):
    t = 0.0
    while t < budget:
        batch = session.pump(dt)
        for m in batch:
            script.append({"dir": "server", "msg": m})
        for m in batch:
            if m["type"] == mtype and (state is None or m.get("state") == state):
                return m
        t += dt
    raise RuntimeError(f"no {mtype} within {budget}s")


def ensure_state(session, script, state, budget=5.0):
    if any(
        e["dir"] == "server"
        and e["msg"]["type"] == "state"
        and e["msg"].get("state") == state
        for e in script
    ):
        return
    pump_until(session, script, "state", state=state, budget=budget)


def last_plan(script):
    return [e for e in script if e["dir"] == "server"
            and e["msg"]["type"] == "plan_proposed"][-1]["msg"]


def build_fixture() -> dict:
    session = WireSession(demo_trim_drag_scenario())
    script: list[dict] = []

    plan = pump_until(session, script, "plan_proposed", budget=2.0)
    pid = plan["plan_id"]
    poly = plan["polylines"][0]
    w0 = poly[0]
    w1 = poly[1]

    # stale approve first: the console must surface a retry prompt
    stale = {"type": "decision", "plan_id": pid, "revision": 41,
             "action": "approve"}
    script.append({"dir": "client", "msg": stale})
    session.handle_client(stale)
    pump_until(session, script, "error", budget=2.0)

    # gesture 1: drag waypoint 0 by (+4, +2)
    drag_end = [w0[0] + 4.0, w0[1] + 2.0]
    edit1 = {"type": "edit", "plan_id": pid, "revision": plan["revision"],
             "op": "move", "index": 0, "point": drag_end}
    script.append({
        "dir": "gesture",
        "gesture": {"kind": "drag-waypoint", "index": 0, "point": drag_end},
        "expect": edit1,
    })
    session.handle_client(edit1)
    plan = pump_until(session, script, "plan_proposed", budget=2.0)

    # gesture 2: click on empty canvas near the middle of segment 0-1
    mid = [(drag_end[0] + w1[0]) / 2.0 + 1.0, (drag_end[1] + w1[1]) / 2.0]
    edit2 = {"type": "edit", "plan_id": pid, "revision": plan["revision"],
             "op": "add", "index": 1, "point": mid}
    script.append({
        "dir": "gesture",
        "gesture": {"kind": "click-empty", "point": mid},
        "expect": edit2,
    })
    session.handle_client(edit2)
    plan = pump_until(session, script, "plan_proposed", budget=2.0)

    # gesture 3: click exactly on waypoint 1 in remove mode
    target = plan["polylines"][0][1]
    edit3 = {"type": "edit", "plan_id": pid, "revision": plan["revision"],
             "op": "remove", "index": 1}
    script.append({
        "dir": "gesture",
        "gesture": {"kind": "click-waypoint", "point": list(target)},
        "expect": edit3,
    })
    session.handle_client(edit3)
    plan = pump_until(session, script, "plan_proposed", budget=2.0)

    approve = {"type": "decision", "plan_id": pid,
               "revision": plan["revision"], "action": "approve"}
    script.append({"dir": "client", "msg": approve})
    session.handle_client(approve)

    assess = pump_until(session, script, "assessment", budget=30.0)
    assert assess["alert"] is True
    ensure_state(session, script, Mode.AWAITING_INSPECTION.value)

    clear = {"type": "inspection_cleared"}
    script.append({"dir": "client", "msg": clear})
    session.handle_client(clear)
    ensure_state(session, script, Mode.IDLE.value)
    assert session.runner.state.mode is Mode.IDLE

    led_sequence = [e["msg"]["led"] for e in script
                    if e["dir"] == "server" and e["msg"]["type"] == "state"]
    return {
        "script": script,
        "expected": {
            "final_polylines": last_plan(script)["polylines"],
            "final_revision": last_plan(script)["revision"],
            "led_sequence": led_sequence,
            "assessment": {"d_px": assess["d_px"], "psi": assess["psi"],
                           "alert": assess["alert"]},
        },
    }


def main() -> None:
    fixture = build_fixture()
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "session.json").write_text(json.dumps(fixture, indent=1))
    n_server = sum(1 for e in fixture["script"] if e["dir"] == "server")
    print(f"wrote {OUT/'session.json'}: {len(fixture['script'])} steps, "
          f"{n_server} server messages, final revision "
          f"{fixture['expected']['final_revision']}")


if __name__ == "__main__":
    main()
