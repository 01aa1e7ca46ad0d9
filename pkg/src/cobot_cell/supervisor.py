"""Event-driven safety/transparency supervisor.

A single logical event loop owns all state. Sensor streams, simulator ticks,
and operator commands feed one ordered queue; ties at equal timestamps break
by fixed source priority (contact > zone > operator > internal, ticks last).
Robot motion is gated so nonzero velocity commands can only be emitted while
EXECUTING; a contact e-stop is terminal for the episode, a human pause is
resumable.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .geometry import Point2
from .knife import ContactClassifier, ContactEvent, ForceThreshold
from .perception import HandFrame, TracePlayback, ZoneState, classify_zone
from .planner import (
    CutPlan,
    PlanEdit,
    RobotPath,
    apply_edit,
    approve_plan,
    plan_slices,
    plan_trim,
    segment,
    to_robot_path,
)
from .raster import RasterImage, write_ppm
from .scenario import Scenario, SliceTask, TrimTask
from .sim import CutWalk, MeatSpec, render, scripted_hands
from .uncertainty import CutAssessment, MeatLocation, evaluate_cut, locate_meat


class Mode(Enum):
    IDLE = "idle"
    AWAITING_APPROVAL = "awaiting_approval"
    EXECUTING = "executing"
    PAUSED_HUMAN = "paused_human"
    ESTOPPED_CONTACT = "estopped_contact"
    POST_CUT = "post_cut"
    AWAITING_INSPECTION = "awaiting_inspection"


GATED_MODES = frozenset(
    m for m in Mode if m is not Mode.EXECUTING
)

RED_MODES = frozenset(
    {Mode.PAUSED_HUMAN, Mode.ESTOPPED_CONTACT, Mode.AWAITING_INSPECTION}
)


class LedColor(Enum):
    GREEN = "green"
    YELLOW = "yellow"
    RED = "red"


@dataclass(frozen=True)
class SupervisorState:
    mode: Mode = Mode.IDLE
    plan_id: Optional[str] = None
    revision: int = 0
    progress: float = 0.0


# ---------------------------------------------------------------- events

@dataclass(frozen=True)
class Event:
    t: float


@dataclass(frozen=True)
class MeatPlaced(Event):
    pass


@dataclass(frozen=True)
class PlanProposed(Event):
    plan_id: str
    revision: int


@dataclass(frozen=True)
class EditReceived(Event):
    plan_id: str
    revision: int  # revision after the edit was applied


@dataclass(frozen=True)
class Approved(Event):
    plan_id: str
    revision: int


@dataclass(frozen=True)
class Rejected(Event):
    plan_id: str
    revision: int


@dataclass(frozen=True)
class ZoneChanged(Event):
    zone: ZoneState


@dataclass(frozen=True)
class ContactDetected(Event):
    contact: ContactEvent


@dataclass(frozen=True)
class CutFinished(Event):
    plan_id: str


@dataclass(frozen=True)
class AssessmentReady(Event):
    plan_id: str
    assessment: CutAssessment


@dataclass(frozen=True)
class InspectionCleared(Event):
    pass


@dataclass(frozen=True)
class Reset(Event):
    pass


@dataclass(frozen=True)
class Action:
    kind: str
    plan_id: Optional[str] = None


def led_for(state: SupervisorState, zone: ZoneState) -> LedColor:
    """Deterministic LED mapping; RED flags every failure or pause case."""
    if state.mode in RED_MODES or zone is ZoneState.WARNING:
        return LedColor.RED
    if zone is ZoneState.SAFE:
        return LedColor.YELLOW
    return LedColor.GREEN


def handle_event(
    state: SupervisorState,
    zone: ZoneState,
    ev: Event,
    resume_on: str = "clear",
) -> tuple[SupervisorState, ZoneState, list[Action]]:
    """Pure transition function; unrelated events are no-ops.

    resume_on picks the zone severity that lets a human pause resume:
    "clear" (conservative default) or "safe".
    """
    actions: list[Action] = []

    if isinstance(ev, Reset):
        return SupervisorState(), zone, [Action("reset")]

    if state.mode is Mode.ESTOPPED_CONTACT:
        # terminal: absorbs everything except Reset
        if isinstance(ev, (Approved, Rejected)):
            return state, zone, [Action("stale_plan", ev.plan_id)]
        if isinstance(ev, ZoneChanged):
            return state, ev.zone, []
        return state, zone, []

    if isinstance(ev, ContactDetected):
        new = replace(state, mode=Mode.ESTOPPED_CONTACT)
        return new, zone, [Action("gate_velocity"), Action("episode_over")]

    if isinstance(ev, ZoneChanged):
        z = ev.zone
        if state.mode is Mode.EXECUTING and z is ZoneState.WARNING:
            return replace(state, mode=Mode.PAUSED_HUMAN), z, [Action("gate_velocity")]
        if state.mode is Mode.PAUSED_HUMAN:
            threshold = ZoneState.CLEAR if resume_on == "clear" else ZoneState.SAFE
            if z <= threshold:
                return replace(state, mode=Mode.EXECUTING), z, [
                    Action("resume_velocity")
                ]
        return state, z, []

    if isinstance(ev, PlanProposed):
        if state.mode is Mode.IDLE:
            return (
                SupervisorState(
                    mode=Mode.AWAITING_APPROVAL,
                    plan_id=ev.plan_id,
                    revision=ev.revision,
                ),
                zone,
                [],
            )
        return state, zone, []

    if isinstance(ev, EditReceived):
        if (
            state.mode is Mode.AWAITING_APPROVAL
            and state.plan_id == ev.plan_id
        ):
            return replace(state, revision=ev.revision), zone, []
        return state, zone, []

    if isinstance(ev, Approved):
        if (
            state.mode is Mode.AWAITING_APPROVAL
            and state.plan_id == ev.plan_id
            and state.revision == ev.revision
        ):
            # approval with a hand already in the warning zone arms the robot
            # paused; motion waits for the zone to clear
            mode = (
                Mode.PAUSED_HUMAN if zone is ZoneState.WARNING else Mode.EXECUTING
            )
            return (
                replace(state, mode=mode, progress=0.0),
                zone,
                [Action("begin_execution", ev.plan_id)],
            )
        return state, zone, [Action("stale_plan", ev.plan_id)]

    if isinstance(ev, Rejected):
        if (
            state.mode is Mode.AWAITING_APPROVAL
            and state.plan_id == ev.plan_id
            and state.revision == ev.revision
        ):
            return SupervisorState(), zone, [Action("replan", ev.plan_id)]
        return state, zone, [Action("stale_plan", ev.plan_id)]

    if isinstance(ev, CutFinished):
        if state.mode is Mode.EXECUTING and state.plan_id == ev.plan_id:
            return (
                replace(state, mode=Mode.POST_CUT, progress=1.0),
                zone,
                [Action("capture_post_image", ev.plan_id),
                 Action("request_assessment", ev.plan_id)],
            )
        return state, zone, []

    if isinstance(ev, AssessmentReady):
        if state.mode is Mode.POST_CUT and state.plan_id == ev.plan_id:
            if ev.assessment.alert:
                return replace(state, mode=Mode.AWAITING_INSPECTION), zone, []
            return SupervisorState(), zone, []
        return state, zone, []

    if isinstance(ev, InspectionCleared):
        if state.mode is Mode.AWAITING_INSPECTION:
            return SupervisorState(), zone, []
        return state, zone, []

    return state, zone, []


@dataclass(frozen=True)
class VelocityCommand:
    v: tuple[float, float, float]
    t: float = 0.0

    @property
    def speed(self) -> float:
        return math.hypot(self.v[0], self.v[1], self.v[2])


_ZERO_V = (0.0, 0.0, 0.0)


def velocity_command(
    path: Optional[RobotPath], progress: float, gated: bool, t: float = 0.0
) -> VelocityCommand:
    """Unit tangent of the current path segment times commanded speed, or the
    zero vector when gated or finished."""
    if gated or path is None or progress >= 1.0:
        return VelocityCommand(v=_ZERO_V, t=t)
    total = path.total_length()
    if total == 0:
        return VelocityCommand(v=_ZERO_V, t=t)
    s = max(0.0, progress) * total
    cum = 0.0
    pts = path.points
    chosen = len(pts) - 2
    for i in range(len(pts) - 1):
        seg = math.dist(pts[i][:2], pts[i + 1][:2])
        if s <= cum + seg:
            chosen = i
            break
        cum += seg
    a, b = pts[chosen], pts[chosen + 1]
    seg = math.dist(a[:2], b[:2])
    sp = path.commanded_speed
    return VelocityCommand(v=((b[0] - a[0]) / seg * sp, (b[1] - a[1]) / seg * sp, 0.0), t=t)


# ---------------------------------------------------------------- episode log

@dataclass
class LogEntry:
    t: float
    kind: str
    state: str
    zone: str
    led: str
    vx: float
    vy: float
    vz: float
    payload: Optional[dict] = None  # in-memory only, not serialized

    def to_json(self) -> str:
        return json.dumps(
            {
                "t": self.t,
                "kind": self.kind,
                "state": self.state,
                "zone": self.zone,
                "led": self.led,
                "vx": self.vx,
                "vy": self.vy,
                "vz": self.vz,
            }
        )


@dataclass
class EpisodeLog:
    entries: list[LogEntry] = field(default_factory=list)

    def append(self, entry: LogEntry) -> None:
        self.entries.append(entry)

    def to_jsonl(self) -> str:
        return "\n".join(e.to_json() for e in self.entries) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())

    def final_state(self) -> str:
        return self.entries[-1].state if self.entries else Mode.IDLE.value


# priorities: contact > zone > operator > internal; ticks process last so
# same-timestamp events always take effect before the tick's command.
PRIO_CONTACT = 0
PRIO_ZONE = 1
PRIO_OPERATOR = 2
PRIO_INTERNAL = 3
PRIO_SAFETY_TICK = 7
PRIO_CONTROL_TICK = 9


class EpisodeRunner:
    """Drives one scenario episode on the shared simulation clock.

    Samples zone classification at the safety rate, emits velocity commands
    and polls the knife at the control rate, and produces a totally ordered
    episode log. Deterministic given (scenario, seed).
    """

    def __init__(
        self,
        scenario: Scenario,
        auto_operator: bool = True,
        resume_on: Optional[str] = None,
        outbound: Optional[Callable[[dict], None]] = None,
    ):
        self.scenario = scenario
        self.cfg = scenario.cfg
        self.auto_operator = auto_operator
        self.resume_on = resume_on if resume_on is not None else scenario.resume_on
        self.outbound = outbound
        self.rng = np.random.default_rng(scenario.seed)
        self.zones = scenario.zone_config()
        self.calibration = scenario.calibration()
        self.threshold = ForceThreshold(
            base=scenario.knife_base_lbf(),
            margin=scenario.knife.margin,
            debounce=scenario.knife.debounce,
        )
        self.state = SupervisorState()
        self.zone = ZoneState.CLEAR
        self.log = EpisodeLog()
        self.plan: Optional[CutPlan] = None
        self.path: Optional[RobotPath] = None
        self.walk: Optional[CutWalk] = None
        self.classifier: Optional[ContactClassifier] = None
        self.pre_location: Optional[MeatLocation] = None
        self.pre_image: Optional[RasterImage] = None
        self.post_image: Optional[RasterImage] = None
        self.post_spec: Optional[MeatSpec] = None
        self.assessment: Optional[CutAssessment] = None
        self.t_first_bone: Optional[float] = None
        self.t = 0.0
        self._heap: list = []
        self._seq = 0
        self._plan_counter = 0
        self._replans = 0
        self._done = False
        self._ending = False
        self._control_k = 0
        self._safety_k = 0
        self._last_sensed: Optional[ZoneState] = None
        self._last_v = _ZERO_V
        self.playback = TracePlayback(self._build_trace())
        self._push(0.0, PRIO_INTERNAL, ("event", MeatPlaced(t=0.0)))
        self._push(0.0, PRIO_SAFETY_TICK, ("safety",))
        self._push(1.0 / self.cfg.control_hz, PRIO_CONTROL_TICK, ("control",))
        self._control_k = 1

    # ------------------------------------------------------------ plumbing

    def _build_trace(self) -> tuple[HandFrame, ...]:
        sc = self.scenario
        if sc.hand_trace:
            frames = list(sc.hand_trace)
        elif sc.hands:
            frames = scripted_hands(sc.hands, self.cfg, hand_scale=sc.hand_scale)
        else:
            frames = []
        if sc.miss_rate > 0.0:
            rng = np.random.default_rng(sc.seed ^ 0x5EED)
            frames = [
                replace_frame_empty(f) if rng.random() < sc.miss_rate else f
                for f in frames
            ]
        return tuple(frames)

    def _push(self, t: float, prio: int, item: tuple) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (t, prio, self._seq, item))

    def _emit(self, kind: str, payload: Optional[dict] = None,
              v: Optional[tuple[float, float, float]] = None) -> None:
        vel = v if v is not None else _ZERO_V
        self.log.append(
            LogEntry(
                t=self.t,
                kind=kind,
                state=self.state.mode.value,
                zone=self.zone.wire_name,
                led=led_for(self.state, self.zone).value,
                vx=vel[0],
                vy=vel[1],
                vz=vel[2],
                payload=payload,
            )
        )

    def _send(self, msg: dict) -> None:
        if self.outbound is not None:
            self.outbound(msg)

    def _send_state(self) -> None:
        self._send(
            {
                "type": "state",
                "state": self.state.mode.value,
                "zone": self.zone.wire_name,
                "led": led_for(self.state, self.zone).value,
                "t": self.t,
            }
        )

    # ------------------------------------------------------------ main loop

    def run(self, t_max: Optional[float] = None) -> EpisodeLog:
        limit = t_max if t_max is not None else self.scenario.t_max_s
        while not self._done:
            self.step(limit)
        return self.log

    def step(self, t_limit: float) -> None:
        """Process the next scheduled item; sets done when the episode ends."""
        if self._done:
            return
        if not self._heap:
            self._done = True
            return
        t, prio, _, item = heapq.heappop(self._heap)
        if t > t_limit:
            self._done = True
            self._emit("act_episode_timeout")
            return
        self.t = t
        if item[0] == "safety":
            self._safety_tick(t)
        elif item[0] == "control":
            self._control_tick(t)
        elif item[0] == "event":
            self._handle(item[1])
        else:
            self._operator_item(item)

    def advance_to(self, t_target: float) -> None:
        """Step the loop until the clock reaches t_target (wire server use)."""
        while not self._done and self._heap and self._heap[0][0] <= t_target:
            self.step(self.scenario.t_max_s)

    @property
    def done(self) -> bool:
        return self._done

    # ------------------------------------------------------------ ticks

    def _safety_tick(self, t: float) -> None:
        for frame in self.playback.poll(t):
            z = classify_zone(frame, self.zones)
            if z is not self._last_sensed:
                self._last_sensed = z
                self._push(t, PRIO_ZONE, ("event", ZoneChanged(t=t, zone=z)))
        self._safety_k += 1
        self._push(self._safety_k / self.cfg.safety_hz, PRIO_SAFETY_TICK, ("safety",))

    def _control_tick(self, t: float) -> None:
        dt = 1.0 / self.cfg.control_hz
        sample = None
        if self.state.mode is Mode.EXECUTING and self.walk is not None:
            ds = self.scenario.speed_cmps * dt
            sample = self.walk.step(t, ds)
            if self.t_first_bone is None and self.walk.t_first_bone is not None:
                self.t_first_bone = self.walk.t_first_bone
            self.state = replace(self.state, progress=self.walk.progress)
            if self.walk.finished:
                self._push(
                    t, PRIO_INTERNAL,
                    ("event", CutFinished(t=t, plan_id=self.state.plan_id)),
                )
        elif self.state.mode is Mode.PAUSED_HUMAN and self.walk is not None:
            sample = self.walk.hold(t)
        if sample is not None and self.classifier is not None:
            contact = self.classifier.push(sample)
            if contact is not None:
                self._push(
                    contact.t_detect + self.scenario.knife.link_latency_s,
                    PRIO_CONTACT,
                    ("event", ContactDetected(t=contact.t_detect, contact=contact)),
                )
        gated = self.state.mode in GATED_MODES
        cmd = velocity_command(self.path, self.state.progress, gated, t=t)
        self._last_v = cmd.v
        self._emit("vel", v=cmd.v)
        if self._ending:
            self._emit("act_episode_end")
            self._done = True
            return
        self._control_k += 1
        self._push(
            self._control_k / self.cfg.control_hz, PRIO_CONTROL_TICK, ("control",)
        )

    # ------------------------------------------------------------ events

    def _operator_item(self, item: tuple) -> None:
        kind = item[0]
        if kind == "op_edit":
            doc = item[1]
            stale = self.plan is None or (
                doc.get("plan_id") is not None
                and doc["plan_id"] != self.plan.plan_id
            ) or (
                doc.get("expect_revision") is not None
                and int(doc["expect_revision"]) != self.plan.revision
            )
            if stale:
                self._emit("act_stale_plan")
                self._send({"type": "error", "code": "stale_plan"})
                return
            edit = PlanEdit(
                op=doc["op"],
                index=int(doc["index"]),
                point=(
                    Point2(float(doc["point"][0]), float(doc["point"][1]))
                    if doc.get("point") is not None
                    else None
                ),
            )
            try:
                self.plan = apply_edit(self.plan, edit)
            except ValueError as exc:
                self._emit("act_edit_rejected", payload={"error": str(exc)})
                self._send({"type": "error", "code": "bad_edit"})
                return
            self._handle(
                EditReceived(t=self.t, plan_id=self.plan.plan_id,
                             revision=self.plan.revision)
            )
            if self.outbound is not None:
                self._announce_plan()
        elif kind == "op_approve":
            self._handle(
                Approved(t=self.t, plan_id=self.plan.plan_id,
                         revision=self.plan.revision)
            )
        elif kind == "op_clear":
            self._handle(InspectionCleared(t=self.t))

    def inject(self, ev: Event, prio: int = PRIO_OPERATOR) -> None:
        """External (wire) event entry point; funneled through the queue."""
        self._push(max(ev.t, self.t), prio, ("event", ev))

    def _handle(self, ev: Event) -> None:
        before = (self.state.mode, self.zone)
        self.state, self.zone, actions = handle_event(
            self.state, self.zone, ev, resume_on=self.resume_on
        )
        suffix = _event_suffix(ev)
        self._emit(f"ev_{type(ev).__name__.lower()}{suffix}", v=self._last_v
                   if self.state.mode is Mode.EXECUTING else None)
        for action in actions:
            self._apply_action(action, ev)
        if isinstance(ev, MeatPlaced):
            self._plan_current_specimen()
        if isinstance(ev, PlanProposed) and self.state.mode is Mode.AWAITING_APPROVAL:
            self._announce_plan()
            if self.auto_operator:
                self._schedule_operator()
        # a reset is acknowledged with a state snapshot even when it lands on
        # an already-idle machine, so the console always sees a response
        if (self.state.mode, self.zone) != before or isinstance(ev, Reset):
            self._send_state()
        if self.state.mode is Mode.ESTOPPED_CONTACT:
            self._ending = True
        if self.state.mode is Mode.IDLE and self.assessment is not None:
            self._ending = True  # assessment resolved; episode complete
        if (
            self.state.mode is Mode.AWAITING_INSPECTION
            and self.auto_operator
            and self.scenario.operator.clear_inspection_after_s is None
        ):
            self._ending = True

    def _apply_action(self, action: Action, ev: Event) -> None:
        self._emit(f"act_{action.kind}")
        if action.kind == "begin_execution":
            self.plan = approve_plan(self.plan)
            self.path = to_robot_path(self.plan, self.calibration,
                                      self.scenario.speed_cmps)
            self.walk = CutWalk(self.scenario.spec, self.path, self.cfg, self.rng)
            self.classifier = ContactClassifier(self.threshold)
        elif action.kind == "capture_post_image":
            self.post_spec = self.walk.post_spec()
            self.post_image = render(self.post_spec, self.cfg)
        elif action.kind == "request_assessment":
            masks = segment(self.post_image, self.scenario.thresholds)
            post_loc = locate_meat(masks.meat, t=self.t)
            assessment = evaluate_cut(
                self.pre_location, post_loc, self.scenario.beta, self.scenario.tau
            )
            self.assessment = assessment
            self._push(
                self.t,
                PRIO_INTERNAL,
                ("event", AssessmentReady(t=self.t, plan_id=self.state.plan_id,
                                          assessment=assessment)),
            )
            self._send(
                {
                    "type": "assessment",
                    "plan_id": self.state.plan_id,
                    "d_px": assessment.d,
                    "psi": assessment.psi,
                    "alert": assessment.alert,
                }
            )
            if self.auto_operator and assessment.alert:
                after = self.scenario.operator.clear_inspection_after_s
                if after is not None:
                    self._push(self.t + after, PRIO_OPERATOR, ("op_clear",))
        elif action.kind == "replan":
            if self.auto_operator and self._replans < 3:
                self._replans += 1
                self._plan_current_specimen()
        elif action.kind == "stale_plan":
            self._send({"type": "error", "code": "stale_plan"})

    def _plan_current_specimen(self) -> None:
        if self.pre_image is None:
            self.pre_image = render(self.scenario.spec, self.cfg)
        masks = segment(self.pre_image, self.scenario.thresholds)
        self.pre_location = locate_meat(masks.meat, t=self.t)
        self._plan_counter += 1
        plan_id = f"plan-{self._plan_counter}"
        task = self.scenario.task
        if isinstance(task, SliceTask):
            self.plan = plan_slices(masks.meat, task.n, plan_id=plan_id)
        else:
            assert isinstance(task, TrimTask)
            self.plan = plan_trim(masks, task.epsilon_px, plan_id=plan_id)
        self._push(
            self.t,
            PRIO_INTERNAL,
            ("event", PlanProposed(t=self.t, plan_id=plan_id,
                                   revision=self.plan.revision)),
        )

    def _announce_plan(self) -> None:
        if self.outbound is None:
            return
        import base64

        self._send(
            {
                "type": "plan_proposed",
                "plan_id": self.plan.plan_id,
                "revision": self.plan.revision,
                "image_ppm_b64": base64.b64encode(write_ppm(self.pre_image)).decode(),
                "polylines": [
                    [[p.x, p.y] for p in line.points] for line in self.plan.polylines
                ],
            }
        )

    def _schedule_operator(self) -> None:
        op = self.scenario.operator
        for doc in op.edits:
            self._push(self.t + float(doc.get("after_s", 0.1)), PRIO_OPERATOR,
                       ("op_edit", doc))
        self._push(self.t + op.approve_after_s, PRIO_OPERATOR, ("op_approve",))


def _event_suffix(ev: Event) -> str:
    if isinstance(ev, (PlanProposed, EditReceived, Approved, Rejected)):
        return f":{ev.plan_id}@{ev.revision}"
    if isinstance(ev, (CutFinished, AssessmentReady)):
        return f":{ev.plan_id}"
    if isinstance(ev, ZoneChanged):
        return f":{ev.zone.wire_name}"
    return ""


def replace_frame_empty(frame: HandFrame) -> HandFrame:
    """Detector-miss fault injection: the frame arrives with no landmarks."""
    return HandFrame(t=frame.t, landmarks=(), source_id=frame.source_id)


def run(scenario: Scenario, t_max: Optional[float] = None,
        resume_on: Optional[str] = None) -> EpisodeLog:
    """Run one scenario episode headlessly with the scripted operator."""
    runner = EpisodeRunner(scenario, auto_operator=True, resume_on=resume_on)
    return runner.run(t_max=t_max)
