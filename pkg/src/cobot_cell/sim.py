"""Deterministic synthetic workcell.

Generates meat specimens (meat/fat polygons with an optional subsurface
bone), renders the camera raster, produces knife force traces from the
blade/material interaction, applies the drag model on bone contact, and
synthesizes scripted hand-landmark traces. All randomness flows from an
explicit generator handle so identical seeds replay identically.

The bone is never rendered: the vision pipeline cannot see it, which is what
makes post-cut displacement scoring non-vacuous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .geometry import Point2, Polygon, point_in_polygon
from .knife import SENSOR_MAX_LBF, ForceSample
from .perception import HandFrame
from .planner import ColorThresholds, RobotPath
from .raster import RasterImage, fill_polygon_mask

MEAT_COLOR = (170, 60, 60)
FAT_COLOR = (235, 225, 205)
BACKGROUND_COLOR = (40, 80, 40)

DEFAULT_THRESHOLDS = ColorThresholds.from_ranges(
    meat=((120, 220), (10, 110), (10, 110)),
    fat=((185, 255), (175, 255), (155, 255)),
)


@dataclass(frozen=True)
class Pose:
    """Rigid placement (cm, degrees) of a body-frame polygon in the world."""

    x: float = 0.0
    y: float = 0.0
    theta_deg: float = 0.0

    def apply(self, poly: Polygon) -> Polygon:
        a = math.radians(self.theta_deg)
        ca, sa = math.cos(a), math.sin(a)
        return Polygon(
            Point2(self.x + ca * p.x - sa * p.y, self.y + sa * p.x + ca * p.y)
            for p in poly.vertices
        )

@dataclass(frozen=True)
class MeatSpec:
    """Specimen polygons in a body frame (cm) plus world placement."""

    meat: Polygon
    fat: Polygon
    pose: Pose = Pose()
    bone: Optional[Polygon] = None

    def __post_init__(self):
        for other, name in ((self.fat, "fat"), (self.bone, "bone")):
            if other is None:
                continue
            if _bbox_gap(self.meat, other) > 1e-6:
                raise ValueError(f"{name} does not touch the meat")

    def posed_meat(self) -> Polygon:
        return self.pose.apply(self.meat)

    def posed_fat(self) -> Polygon:
        return self.pose.apply(self.fat)

    def posed_bone(self) -> Optional[Polygon]:
        return self.pose.apply(self.bone) if self.bone is not None else None

    def transformed(
        self,
        dx: float = 0.0,
        dy: float = 0.0,
        dtheta_deg: float = 0.0,
        pivot: Optional[Point2] = None,
    ) -> "MeatSpec":
        """Rigidly move the posed specimen: rotate dtheta about the pivot
        (default: the posed meat centroid) then translate by (dx, dy)."""
        if pivot is None:
            pivot = self.posed_meat().centroid()
        a = math.radians(dtheta_deg)
        ca, sa = math.cos(a), math.sin(a)
        tx0, ty0 = self.pose.x - pivot.x, self.pose.y - pivot.y
        tx = ca * tx0 - sa * ty0 + pivot.x + dx
        ty = sa * tx0 + ca * ty0 + pivot.y + dy
        return replace(
            self, pose=Pose(x=tx, y=ty, theta_deg=self.pose.theta_deg + dtheta_deg)
        )


def _bbox_gap(a: Polygon, b: Polygon) -> float:
    ax0, ay0, ax1, ay1 = a.bounds()
    bx0, by0, bx1, by1 = b.bounds()
    gx = max(bx0 - ax1, ax0 - bx1, 0.0)
    gy = max(by0 - ay1, ay0 - by1, 0.0)
    return max(gx, gy)


@dataclass(frozen=True)
class DragParams:
    translation_gain: float = 1.5  # cm of meat translation per cm blocked travel
    rotation_gain: float = 4.0  # degrees per cm of off-centroid blocked travel
    slip_noise: float = 0.2  # cm std-dev, post-cut settling

    def __post_init__(self):
        if self.translation_gain < 0 or self.rotation_gain < 0 or self.slip_noise < 0:
            raise ValueError("drag gains must be >= 0")


@dataclass(frozen=True)
class ForceParams:
    meat_force_mean: float = 3.0
    meat_force_std: float = 0.5
    bone_ramp_rate: float = 500.0  # lbf per cm of travel in bone
    saturation: float = SENSOR_MAX_LBF

    def __post_init__(self):
        if not (0 <= self.meat_force_mean <= self.saturation):
            raise ValueError("meat force outside sensor range")
        if self.meat_force_std < 0 or self.bone_ramp_rate < 0:
            raise ValueError("force parameters must be >= 0")


@dataclass(frozen=True)
class SimConfig:
    pixel_pitch: float = 0.1  # cm per pixel
    image_size: tuple[int, int] = (640, 480)
    control_hz: int = 500
    safety_hz: int = 60
    seed: int = 0
    drag: DragParams = field(default_factory=DragParams)
    force: ForceParams = field(default_factory=ForceParams)

    def __post_init__(self):
        if self.pixel_pitch <= 0:
            raise ValueError("pixel_pitch must be > 0")
        if self.control_hz <= 0 or self.safety_hz <= 0:
            raise ValueError("rates must be positive")


def render(spec: MeatSpec, cfg: SimConfig) -> RasterImage:
    """Rasterize the specimen: background, then fat, then meat on top.

    The bone is subsurface and intentionally absent from the render.
    """
    w, h = cfg.image_size
    img = np.empty((h, w, 3), dtype=np.uint8)
    img[:, :] = BACKGROUND_COLOR
    for poly, color in ((spec.posed_fat(), FAT_COLOR), (spec.posed_meat(), MEAT_COLOR)):
        verts = np.array(
            [[p.x / cfg.pixel_pitch, p.y / cfg.pixel_pitch] for p in poly.vertices]
        )
        if (
            verts[:, 0].min() < 0
            or verts[:, 1].min() < 0
            or verts[:, 0].max() > w - 1
            or verts[:, 1].max() > h - 1
        ):
            raise ValueError("specimen out of frame")
        mask = fill_polygon_mask(verts, w, h)
        img[mask] = color
    return RasterImage(img)


class CutWalk:
    """Advances the knife tip along a robot path one control tick at a time.

    Material lookups run against the specimen's initial posed geometry; the
    accumulated drag is applied to the pose only when the walk finishes, which
    keeps the blocked-travel arithmetic linear in the bone chord length.
    """

    def __init__(self, spec: MeatSpec, path: RobotPath, cfg: SimConfig,
                 rng: np.random.Generator):
        self.spec = spec
        self.path = path
        self.cfg = cfg
        self.rng = rng
        self._meat = spec.posed_meat()
        self._bone = spec.posed_bone()
        self._centroid = self._meat.centroid()
        pts = [p[:2] for p in path.points]
        self._pts = pts
        self._cum = [0.0]
        for a, b in zip(pts, pts[1:]):
            self._cum.append(self._cum[-1] + math.dist(a, b))
        self.total_length = self._cum[-1]
        self._s = 0.0
        self.last_force = 0.0
        self.travel_meat = 0.0
        self.travel_bone = 0.0
        self._bone_entry_travel = 0.0
        self.t_first_bone: Optional[float] = None
        self._drag_dx = 0.0
        self._drag_dy = 0.0
        self._drag_rot = 0.0

    @property
    def finished(self) -> bool:
        return self._s >= self.total_length - 1e-12

    @property
    def progress(self) -> float:
        if self.total_length == 0:
            return 1.0
        return min(1.0, self._s / self.total_length)

    def _locate(self, s: float) -> tuple[tuple[float, float], tuple[float, float]]:
        """Position and unit tangent at arc length s."""
        i = 0
        while i < len(self._cum) - 2 and s > self._cum[i + 1]:
            i += 1
        a, b = self._pts[i], self._pts[i + 1]
        seg = self._cum[i + 1] - self._cum[i]
        frac = 0.0 if seg == 0 else (s - self._cum[i]) / seg
        pos = (a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1]))
        tangent = ((b[0] - a[0]) / seg, (b[1] - a[1]) / seg) if seg > 0 else (0.0, 0.0)
        return pos, tangent

    def step(self, t: float, ds: float) -> ForceSample:
        """Advance by ds centimeters and sample the sensor at time t."""
        new_s = min(self._s + ds, self.total_length)
        moved = new_s - self._s
        self._s = new_s
        pos, tangent = self._locate(new_s)
        p = Point2(pos[0], pos[1])
        fp = self.cfg.force
        if self._bone is not None and point_in_polygon(p, self._bone):
            if self.t_first_bone is None:
                self.t_first_bone = t
            self._bone_entry_travel += moved
            self.travel_bone += moved
            force = min(
                fp.saturation,
                fp.meat_force_mean + fp.bone_ramp_rate * self._bone_entry_travel,
            )
            self._drag_dx += self.cfg.drag.translation_gain * moved * tangent[0]
            self._drag_dy += self.cfg.drag.translation_gain * moved * tangent[1]
            rx = p.x - self._centroid.x
            ry = p.y - self._centroid.y
            lever = rx * tangent[1] - ry * tangent[0]
            sign = 0.0 if lever == 0 else math.copysign(1.0, lever)
            self._drag_rot += self.cfg.drag.rotation_gain * moved * sign
        elif point_in_polygon(p, self._meat):
            self._bone_entry_travel = 0.0
            self.travel_meat += moved
            force = float(
                np.clip(
                    self.rng.normal(fp.meat_force_mean, fp.meat_force_std),
                    0.0,
                    fp.saturation,
                )
            )
        else:
            self._bone_entry_travel = 0.0
            force = 0.0
        self.last_force = force
        return ForceSample(t=t, force=force)

    def hold(self, t: float) -> ForceSample:
        """Sensor reading while the blade is stationary (paused)."""
        return ForceSample(t=t, force=self.last_force)

    @property
    def cut_applied(self) -> bool:
        return (self.travel_meat + self.travel_bone) > 0.0

    def post_spec(self) -> MeatSpec:
        """Specimen after the walk: drag from blocked travel plus, when any
        cutting happened, a small random slip that stands in for the meat
        settling after a clean cut."""
        if not self.cut_applied:
            return self.spec
        dx, dy, rot = self._drag_dx, self._drag_dy, self._drag_rot
        slip = self.cfg.drag.slip_noise
        if slip > 0:
            dx += float(self.rng.normal(0.0, slip))
            dy += float(self.rng.normal(0.0, slip))
        return self.spec.transformed(dx=dx, dy=dy, dtheta_deg=rot, pivot=self._centroid)


def simulate_cut(
    spec: MeatSpec, path: RobotPath, cfg: SimConfig, rng: np.random.Generator
) -> tuple[MeatSpec, list[ForceSample], bool]:
    """Batch walk of the whole path at commanded speed per control tick."""
    walk = CutWalk(spec, path, cfg, rng)
    dt = 1.0 / cfg.control_hz
    ds = path.commanded_speed * dt
    forces: list[ForceSample] = []
    t = 0.0
    k = 0
    while not walk.finished:
        k += 1
        t = k * dt
        forces.append(walk.step(t, ds))
    return walk.post_spec(), forces, walk.cut_applied


# MediaPipe-style 21-landmark template (px offsets, zero mean), wrist at the
# bottom and fingers pointing up in image coordinates.
_TEMPLATE_RAW = (
    (0, 46),
    (-18, 36), (-30, 24), (-38, 14), (-44, 6),
    (-16, 8), (-20, -6), (-22, -16), (-24, -26),
    (-4, 6), (-4, -10), (-4, -22), (-4, -32),
    (8, 8), (10, -6), (12, -16), (14, -24),
    (20, 12), (24, 0), (27, -8), (30, -16),
)
_mx = sum(p[0] for p in _TEMPLATE_RAW) / len(_TEMPLATE_RAW)
_my = sum(p[1] for p in _TEMPLATE_RAW) / len(_TEMPLATE_RAW)
HAND_TEMPLATE: tuple[tuple[float, float], ...] = tuple(
    (p[0] - _mx, p[1] - _my) for p in _TEMPLATE_RAW
)


@dataclass(frozen=True)
class HandScriptPoint:
    t: float
    centroid: tuple[float, float]


def hand_centroid_at(script: Sequence[HandScriptPoint], t: float) -> tuple[float, float]:
    """Clamp-interpolated centroid position at time t."""
    if not script:
        raise ValueError("empty hand script")
    if t <= script[0].t:
        return script[0].centroid
    for a, b in zip(script, script[1:]):
        if t <= b.t:
            frac = (t - a.t) / (b.t - a.t)
            return (
                a.centroid[0] + frac * (b.centroid[0] - a.centroid[0]),
                a.centroid[1] + frac * (b.centroid[1] - a.centroid[1]),
            )
    return script[-1].centroid


def landmarks_at(
    script: Sequence[HandScriptPoint], t: float, hand_scale: float = 1.0
) -> tuple[Point2, ...]:
    cx, cy = hand_centroid_at(script, t)
    return tuple(
        Point2(cx + hand_scale * ox, cy + hand_scale * oy) for ox, oy in HAND_TEMPLATE
    )


def scripted_hands(
    script: Sequence[HandScriptPoint],
    cfg: SimConfig,
    hand_scale: float = 1.0,
    source_id: int = 0,
) -> list[HandFrame]:
    """Synthesize a landmark trace from a centroid script, sampled on the
    safety-loop grid. The 21 landmarks ride a rigid template around the
    centroid; articulation is irrelevant to zone containment."""
    ts = [p.t for p in script]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("unordered script")
    if not script:
        return []
    t_end = script[-1].t
    n = int(math.floor(t_end * cfg.safety_hz + 1e-9))
    frames = []
    for k in range(n + 1):
        t = k / cfg.safety_hz
        frames.append(
            HandFrame(t=t, landmarks=landmarks_at(script, t, hand_scale),
                      source_id=source_id)
        )
    return frames
