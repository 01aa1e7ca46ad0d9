"""Scenario files: one JSON document describing a full workcell episode.

A scenario bundles the simulator config, the specimen, the cutting task, the
scripted hands, thresholds, and the operator script. Everything an episode
needs flows from here plus the seed, so runs replay byte-identically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .geometry import Homography, Point2, Polygon
from .perception import HandFrame, ZoneConfig
from .planner import Calibration, ColorThresholds
from .sim import (
    DEFAULT_THRESHOLDS,
    DragParams,
    ForceParams,
    HandScriptPoint,
    MeatSpec,
    Pose,
    SimConfig,
)


class ScenarioError(ValueError):
    """Scenario parse or validation failure."""


@dataclass(frozen=True)
class SliceTask:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ScenarioError("slice task needs n >= 2")


@dataclass(frozen=True)
class TrimTask:
    epsilon_px: float = 2.0

    def __post_init__(self):
        if self.epsilon_px < 0:
            raise ScenarioError("epsilon_px must be >= 0")


Task = Union[SliceTask, TrimTask]


@dataclass(frozen=True)
class KnifeSettings:
    margin: float = 0.25
    debounce: int = 2
    base_lbf: Optional[float] = None  # None: derived from the force model
    link_latency_s: float = 0.010


@dataclass(frozen=True)
class OperatorScript:
    """Scripted operator for headless runs; the wire console replaces it."""

    approve_after_s: float = 0.2
    edits: tuple[dict, ...] = ()
    clear_inspection_after_s: Optional[float] = None


@dataclass(frozen=True)
class Scenario:
    seed: int
    cfg: SimConfig
    spec: MeatSpec
    task: Task
    thresholds: ColorThresholds = DEFAULT_THRESHOLDS
    beta: float = 0.05  # per pixel
    tau: float = 0.5
    knife: KnifeSettings = field(default_factory=KnifeSettings)
    zones: Optional[ZoneConfig] = None
    hands: tuple[HandScriptPoint, ...] = ()
    hand_trace: tuple[HandFrame, ...] = ()
    speed_cmps: float = 5.0
    cut_height_z_cm: float = 2.0
    operator: OperatorScript = field(default_factory=OperatorScript)
    t_max_s: float = 60.0
    miss_rate: float = 0.0
    hand_scale: float = 1.0
    resume_on: str = "clear"

    def __post_init__(self):
        if self.hands and self.hand_trace:
            raise ScenarioError("provide hands or hand_trace, not both")
        if self.speed_cmps <= 0:
            raise ScenarioError("speed must be positive")
        if not (0.0 <= self.miss_rate < 1.0):
            raise ScenarioError("miss_rate must be in [0,1)")
        if not (0.0 < self.tau < 1.0) or self.beta <= 0:
            raise ScenarioError("bad uncertainty parameters")
        if self.resume_on not in ("clear", "safe"):
            raise ScenarioError("resume_on must be 'clear' or 'safe'")

    def zone_config(self) -> ZoneConfig:
        return self.zones if self.zones is not None else default_zones(self.cfg.image_size)

    def calibration(self) -> Calibration:
        return Calibration(
            h=Homography.scale(self.cfg.pixel_pitch), cut_height_z=self.cut_height_z_cm
        )

    def knife_base_lbf(self) -> float:
        if self.knife.base_lbf is not None:
            return self.knife.base_lbf
        fp = self.cfg.force
        return fp.meat_force_mean + 4.0 * fp.meat_force_std


def rect(x0: float, y0: float, x1: float, y1: float) -> Polygon:
    return Polygon(
        (Point2(x0, y0), Point2(x1, y0), Point2(x1, y1), Point2(x0, y1))
    )


def default_zones(image_size: tuple[int, int]) -> ZoneConfig:
    """Concentric layout: the warning zone covers the central workspace, the
    safe zone the band around it. Overlap resolves WARNING-first, so a hand
    moving inward reads CLEAR, SAFE, WARNING in that order."""
    w, h = image_size
    warning = rect(0.27 * w, 0.27 * h, 0.73 * w, 0.73 * h)
    safe = rect(0.12 * w, 0.12 * h, 0.88 * w, 0.88 * h)
    return ZoneConfig(warning=warning, safe=safe, image_size=image_size)


def _poly(doc) -> Polygon:
    return Polygon(Point2(float(x), float(y)) for x, y in doc)


def _parse_spec(doc: dict) -> MeatSpec:
    pose_doc = doc.get("pose", [0.0, 0.0, 0.0])
    return MeatSpec(
        meat=_poly(doc["meat"]),
        fat=_poly(doc["fat"]),
        bone=_poly(doc["bone"]) if doc.get("bone") else None,
        pose=Pose(float(pose_doc[0]), float(pose_doc[1]), float(pose_doc[2])),
    )


def _parse_task(doc: dict) -> Task:
    kind = doc.get("kind")
    if kind == "slice":
        return SliceTask(n=int(doc["n"]))
    if kind == "trim":
        return TrimTask(epsilon_px=float(doc.get("epsilon_px", 2.0)))
    raise ScenarioError(f"unknown task kind {kind!r}")


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        cfg_doc = dict(doc.get("config", {}))
        drag = DragParams(**cfg_doc.pop("drag", {}))
        force = ForceParams(**cfg_doc.pop("force", {}))
        if "image_size" in cfg_doc:
            cfg_doc["image_size"] = tuple(cfg_doc["image_size"])
        seed = int(doc.get("seed", 0))
        cfg = SimConfig(seed=seed, drag=drag, force=force, **cfg_doc)
        zones = None
        if "zones" in doc:
            zones = ZoneConfig(
                warning=_poly(doc["zones"]["warning"]),
                safe=_poly(doc["zones"]["safe"]),
                image_size=cfg.image_size,
            )
        hands = tuple(
            HandScriptPoint(t=float(p["t"]), centroid=tuple(map(float, p["centroid"])))
            for p in doc.get("hands", [])
        )
        trace = tuple(
            HandFrame(
                t=float(f["t"]),
                landmarks=tuple(Point2(float(x), float(y)) for x, y in f["landmarks"]),
            )
            for f in doc.get("hand_trace", [])
        )
        th_doc = doc.get("thresholds")
        thresholds = (
            ColorThresholds.from_ranges(meat=th_doc["meat"], fat=th_doc["fat"])
            if th_doc
            else DEFAULT_THRESHOLDS
        )
        unc = doc.get("uncertainty", {})
        knife_doc = doc.get("knife", {})
        op_doc = doc.get("operator", {})
        operator = OperatorScript(
            approve_after_s=float(op_doc.get("approve_after_s", 0.2)),
            edits=tuple(op_doc.get("edits", ())),
            clear_inspection_after_s=op_doc.get("clear_inspection_after_s"),
        )
        return Scenario(
            seed=seed,
            cfg=cfg,
            spec=_parse_spec(doc["meat"]),
            task=_parse_task(doc["task"]),
            thresholds=thresholds,
            beta=float(unc.get("beta", 0.05)),
            tau=float(unc.get("tau", 0.5)),
            knife=KnifeSettings(
                margin=float(knife_doc.get("margin", 0.25)),
                debounce=int(knife_doc.get("debounce", 2)),
                base_lbf=(
                    float(knife_doc["base_lbf"])
                    if knife_doc.get("base_lbf") is not None
                    else None
                ),
                link_latency_s=float(knife_doc.get("link_latency_s", 0.010)),
            ),
            zones=zones,
            hands=hands,
            hand_trace=trace,
            speed_cmps=float(doc.get("speed_cmps", 5.0)),
            cut_height_z_cm=float(doc.get("cut_height_z_cm", 2.0)),
            operator=operator,
            t_max_s=float(doc.get("t_max_s", 60.0)),
            miss_rate=float(doc.get("miss_rate", 0.0)),
            hand_scale=float(doc.get("hand_scale", 1.0)),
            resume_on=str(doc.get("resume_on", "clear")),
        )
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioError(f"bad scenario: {exc}") from exc


def scenario_to_dict(sc: Scenario) -> dict:
    def poly_doc(poly: Optional[Polygon]):
        if poly is None:
            return None
        return [[p.x, p.y] for p in poly.vertices]

    doc: dict = {
        "seed": sc.seed,
        "config": {
            "pixel_pitch": sc.cfg.pixel_pitch,
            "image_size": list(sc.cfg.image_size),
            "control_hz": sc.cfg.control_hz,
            "safety_hz": sc.cfg.safety_hz,
            "drag": {
                "translation_gain": sc.cfg.drag.translation_gain,
                "rotation_gain": sc.cfg.drag.rotation_gain,
                "slip_noise": sc.cfg.drag.slip_noise,
            },
            "force": {
                "meat_force_mean": sc.cfg.force.meat_force_mean,
                "meat_force_std": sc.cfg.force.meat_force_std,
                "bone_ramp_rate": sc.cfg.force.bone_ramp_rate,
                "saturation": sc.cfg.force.saturation,
            },
        },
        "meat": {
            "meat": poly_doc(sc.spec.meat),
            "fat": poly_doc(sc.spec.fat),
            "bone": poly_doc(sc.spec.bone),
            "pose": [sc.spec.pose.x, sc.spec.pose.y, sc.spec.pose.theta_deg],
        },
        "task": (
            {"kind": "slice", "n": sc.task.n}
            if isinstance(sc.task, SliceTask)
            else {"kind": "trim", "epsilon_px": sc.task.epsilon_px}
        ),
        "thresholds": {
            "meat": [[b.lo, b.hi] for b in sc.thresholds.meat],
            "fat": [[b.lo, b.hi] for b in sc.thresholds.fat],
        },
        "uncertainty": {"beta": sc.beta, "tau": sc.tau},
        "knife": {
            "margin": sc.knife.margin,
            "debounce": sc.knife.debounce,
            "base_lbf": sc.knife.base_lbf,
            "link_latency_s": sc.knife.link_latency_s,
        },
        "speed_cmps": sc.speed_cmps,
        "cut_height_z_cm": sc.cut_height_z_cm,
        "operator": {
            "approve_after_s": sc.operator.approve_after_s,
            "edits": list(sc.operator.edits),
            "clear_inspection_after_s": sc.operator.clear_inspection_after_s,
        },
        "t_max_s": sc.t_max_s,
        "miss_rate": sc.miss_rate,
        "hand_scale": sc.hand_scale,
        "resume_on": sc.resume_on,
    }
    if sc.hands:
        doc["hands"] = [{"t": p.t, "centroid": list(p.centroid)} for p in sc.hands]
    if sc.hand_trace:
        doc["hand_trace"] = [
            {"t": f.t, "landmarks": [[p.x, p.y] for p in f.landmarks]}
            for f in sc.hand_trace
        ]
    if sc.zones is not None:
        doc["zones"] = {
            "warning": poly_doc(sc.zones.warning),
            "safe": poly_doc(sc.zones.safe),
        }
    return doc


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc}") from exc
    return loads_scenario(text)


def loads_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid json: {exc}") from exc
    return scenario_from_dict(doc)


def save_scenario(sc: Scenario, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(sc), indent=2, sort_keys=True))
