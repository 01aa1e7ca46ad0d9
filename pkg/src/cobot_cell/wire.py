"""Operator-console wire protocol: JSON text messages over one WebSocket.

The protocol layer is synchronous (WireSession) so it can be driven and
tested without a server; the FastAPI app is a thin async shell that paces the
simulation against wall time and shuttles messages. All client commands
funnel into the supervisor's ordered event queue; state flows out through
immutable snapshots.
"""

import asyncio
import json
from collections import deque
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .scenario import Scenario
from .supervisor import (
    Approved,
    EpisodeRunner,
    InspectionCleared,
    PRIO_OPERATOR,
    Rejected,
    Reset,
)

_EDIT_OPS = ("move", "add", "remove")


class WireSession:
    """Owns one EpisodeRunner without the scripted operator; the console is
    the operator. Messages produced by the supervisor queue up until pumped."""

    def __init__(self, scenario: Scenario, resume_on: Optional[str] = None):
        self._queue: deque[dict] = deque()
        self.last_plan_msg: Optional[dict] = None
        self.runner = EpisodeRunner(
            scenario,
            auto_operator=False,
            resume_on=resume_on,
            outbound=self._queue_message,
        )

    def _queue_message(self, msg: dict) -> None:
        if msg.get("type") == "plan_proposed":
            self.last_plan_msg = msg
        self._queue.append(msg)

    def pump(self, dt: float) -> list[dict]:
        """Advance the simulation clock by dt and drain outbound messages."""
        if not self.runner.done:
            self.runner.advance_to(self.runner.t + dt)
        return self.drain()

    def drain(self) -> list[dict]:
        msgs = list(self._queue)
        self._queue.clear()
        return msgs

    def snapshot(self) -> list[dict]:
        """Messages a newly connected console needs to render."""
        msgs = []
        if self.last_plan_msg is not None:
            msgs.append(self.last_plan_msg)
        r = self.runner
        from .supervisor import led_for

        msgs.append(
            {
                "type": "state",
                "state": r.state.mode.value,
                "zone": r.zone.wire_name,
                "led": led_for(r.state, r.zone).value,
                "t": r.t,
            }
        )
        return msgs

    def handle_client(self, msg: dict) -> list[dict]:
        """Validate and enqueue one client message; returns immediate replies
        (malformed input errors only; stale checks happen at apply time)."""
        mtype = msg.get("type")
        r = self.runner
        if mtype == "edit":
            if (
                msg.get("op") not in _EDIT_OPS
                or not isinstance(msg.get("index"), int)
                or not isinstance(msg.get("plan_id"), str)
                or not isinstance(msg.get("revision"), int)
            ):
                return [{"type": "error", "code": "bad_message"}]
            doc = {
                "op": msg["op"],
                "index": msg["index"],
                "point": msg.get("point"),
                "plan_id": msg["plan_id"],
                "expect_revision": msg["revision"],
            }
            r._push(r.t, PRIO_OPERATOR, ("op_edit", doc))
            return []
        if mtype == "decision":
            if msg.get("action") not in ("approve", "reject") or not isinstance(
                msg.get("revision"), int
            ):
                return [{"type": "error", "code": "bad_message"}]
            cls = Approved if msg["action"] == "approve" else Rejected
            r.inject(cls(t=r.t, plan_id=str(msg.get("plan_id")),
                         revision=msg["revision"]))
            return []
        if mtype == "inspection_cleared":
            r.inject(InspectionCleared(t=r.t))
            return []
        if mtype == "reset":
            r.inject(Reset(t=r.t))
            return []
        return [{"type": "error", "code": "bad_message"}]


def create_app(scenario: Scenario, tick_s: float = 0.02):
    """FastAPI app exposing the wire protocol at /ws."""
    app = FastAPI(title="cobot-cell supervisor")
    session = WireSession(scenario)
    app.state.session = session

    @app.get("/healthz")
    def healthz():
        return {"ok": True, "t": session.runner.t}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        for msg in session.snapshot():
            await ws.send_text(json.dumps(msg))

        async def ticker():
            while True:
                await asyncio.sleep(tick_s)
                for out in session.pump(tick_s):
                    await ws.send_text(json.dumps(out))

        task = asyncio.create_task(ticker())
        try:
            while True:
                text = await ws.receive_text()
                try:
                    msg = json.loads(text)
                except json.JSONDecodeError:
                    await ws.send_text(
                        json.dumps({"type": "error", "code": "bad_message"})
                    )
                    continue
                for reply in session.handle_client(msg):
                    await ws.send_text(json.dumps(reply))
        except WebSocketDisconnect:
            pass
        finally:
            task.cancel()

    return app
