"""Cut planning: RGB-threshold segmentation, slice/trim trajectory fitting,
human waypoint edits, and pixel-to-robot-plane transformation.

Plans are value objects. Every edit returns a fresh plan with the revision
bumped and the edit appended to the log, so the full history replays from the
original proposal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from .geometry import Homography, Point2, Polyline, homography_apply, simplify_polyline
from .raster import RasterImage

DEFAULT_SLICE_OVERSHOOT_PX = 5.0
DEFAULT_TRIM_EPSILON_PX = 2.0


@dataclass(frozen=True)
class ChannelBounds:
    lo: int
    hi: int

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi <= 255):
            raise ValueError("bad channel bounds")


@dataclass(frozen=True)
class ColorThresholds:
    """Inclusive per-channel RGB bounds for the meat and fat classes.

    Ranges may overlap; a pixel satisfying both resolves to meat (trimming
    that misses fat is recoverable, cutting meat labelled as fat is not).
    """

    meat: tuple[ChannelBounds, ChannelBounds, ChannelBounds]
    fat: tuple[ChannelBounds, ChannelBounds, ChannelBounds]

    @classmethod
    def from_ranges(cls, meat, fat) -> "ColorThresholds":
        mk = tuple(ChannelBounds(int(lo), int(hi)) for lo, hi in meat)
        fk = tuple(ChannelBounds(int(lo), int(hi)) for lo, hi in fat)
        return cls(meat=mk, fat=fk)


@dataclass
class SegmentationMasks:
    """Disjoint boolean masks, same shape as the source image."""

    meat: np.ndarray
    fat: np.ndarray

    def __post_init__(self):
        if self.meat.shape != self.fat.shape or self.meat.ndim != 2:
            raise ValueError("mask shape mismatch")
        if bool(np.any(self.meat & self.fat)):
            raise ValueError("masks overlap")


def segment(img: RasterImage, th: ColorThresholds) -> SegmentationMasks:
    """Classify each pixel as meat, fat, or background by inclusive RGB bounds."""
    px = img.pixels.astype(np.int16)

    def in_bounds(bounds) -> np.ndarray:
        m = np.ones(px.shape[:2], dtype=bool)
        for ch, b in enumerate(bounds):
            m &= (px[:, :, ch] >= b.lo) & (px[:, :, ch] <= b.hi)
        return m

    meat = in_bounds(th.meat)
    fat = in_bounds(th.fat) & ~meat
    return SegmentationMasks(meat=meat, fat=fat)


class PlanStatus(Enum):
    PROPOSED = "proposed"
    EDITED = "edited"
    APPROVED = "approved"
    REJECTED = "rejected"


@dataclass(frozen=True)
class PlanEdit:
    """One operator edit addressed by flattened waypoint index across the
    plan's polylines (the wire protocol carries a single index)."""

    op: str  # move | add | remove
    index: int
    point: Optional[Point2] = None

    def __post_init__(self):
        if self.op not in ("move", "add", "remove"):
            raise ValueError(f"unknown edit op {self.op!r}")
        if self.op in ("move", "add") and self.point is None:
            raise ValueError(f"{self.op} edit needs a point")


@dataclass(frozen=True)
class CutPlan:
    plan_id: str
    polylines: tuple[Polyline, ...]
    image_size: tuple[int, int]
    status: PlanStatus = PlanStatus.PROPOSED
    revision: int = 0
    edits: tuple[PlanEdit, ...] = field(default=())

    def __post_init__(self):
        if not self.polylines:
            raise ValueError("plan needs at least one polyline")
        w, h = self.image_size
        for line in self.polylines:
            for p in line.points:
                if not _in_image(p, w, h):
                    raise ValueError("outside workspace image")

    def waypoints(self) -> list[Point2]:
        return [p for line in self.polylines for p in line.points]

    def waypoint_count(self) -> int:
        return sum(len(line) for line in self.polylines)


def _in_image(p: Point2, w: int, h: int) -> bool:
    return 0 <= p.x <= w - 1 and 0 <= p.y <= h - 1


def plan_slices(
    meat_mask: np.ndarray,
    n: int,
    plan_id: str = "plan-slices",
    overshoot_px: float = DEFAULT_SLICE_OVERSHOOT_PX,
    angle_deg: float = 0.0,
) -> CutPlan:
    """Fit n-1 equally spaced parallel cuts across the meat mask's extent.

    Cuts run parallel to the image y axis (the fixture controls orientation);
    angle_deg rotates the cutting direction for non-axis-aligned fixtures.
    Each cut spans the mask's y extent at that abscissa plus an overshoot
    margin so the blade enters and exits clear of the meat.
    """
    if n < 2:
        raise ValueError("nothing to slice")
    h, w = meat_mask.shape
    rows, cols = np.nonzero(meat_mask)
    if rows.size == 0:
        raise ValueError("no meat detected")
    xs = cols.astype(float)
    ys = rows.astype(float)
    if angle_deg != 0.0:
        cx, cy = xs.mean(), ys.mean()
        a = math.radians(angle_deg)
        ca, sa = math.cos(a), math.sin(a)
        rx = ca * (xs - cx) + sa * (ys - cy)
        ry = -sa * (xs - cx) + ca * (ys - cy)
    else:
        cx = cy = 0.0
        ca, sa = 1.0, 0.0
        rx, ry = xs, ys
    x_min, x_max = float(rx.min()), float(rx.max())
    y_lo_all, y_hi_all = float(ry.min()), float(ry.max())
    lines = []
    for k in range(1, n):
        x_k = x_min + k * (x_max - x_min) / n
        near = np.abs(rx - x_k) <= 0.5
        if near.any():
            y_lo, y_hi = float(ry[near].min()), float(ry[near].max())
        else:
            y_lo, y_hi = y_lo_all, y_hi_all
        y_lo -= overshoot_px
        y_hi += overshoot_px
        p0 = _rotate_back(x_k, y_lo, cx, cy, ca, sa)
        p1 = _rotate_back(x_k, y_hi, cx, cy, ca, sa)
        p0 = Point2(min(max(p0.x, 0.0), w - 1), min(max(p0.y, 0.0), h - 1))
        p1 = Point2(min(max(p1.x, 0.0), w - 1), min(max(p1.y, 0.0), h - 1))
        lines.append(Polyline((p0, p1)))
    return CutPlan(plan_id=plan_id, polylines=tuple(lines), image_size=(w, h))


def _rotate_back(x: float, y: float, cx: float, cy: float, ca: float, sa: float) -> Point2:
    return Point2(cx + ca * x - sa * y, cy + sa * x + ca * y)


# Moore neighborhood in clockwise order for y-down images, starting North.
_MOORE = ((0, -1), (1, -1), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1))


def plan_trim(
    masks: SegmentationMasks,
    epsilon_px: float = DEFAULT_TRIM_EPSILON_PX,
    plan_id: str = "plan-trim",
) -> CutPlan:
    """Fit one cutting polyline along the meat/fat shared boundary.

    Traces the meat contour (Moore neighbor following, 8-connectivity), keeps
    the longest contiguous stretch adjacent to fat, then simplifies it so the
    waypoint count stays small while the dropped points deviate at most
    epsilon_px from the retained chain.
    """
    meat, fat = masks.meat, masks.fat
    if not meat.any() or not fat.any():
        raise ValueError("no meat-fat boundary")
    fat_dilated = _dilate8(fat)
    if not bool(np.any(meat & fat_dilated)):
        raise ValueError("no meat-fat boundary")
    contour = _trace_meat_contour(meat)
    flags = [bool(fat_dilated[r, c]) for c, r in contour]
    chain = _longest_cyclic_run(contour, flags)
    if len(chain) < 2:
        raise ValueError("no meat-fat boundary")
    pts = []
    for c, r in chain:
        p = Point2(float(c), float(r))
        if pts and pts[-1].as_tuple() == p.as_tuple():
            continue
        pts.append(p)
    line = simplify_polyline(Polyline(pts), epsilon_px)
    h, w = meat.shape
    return CutPlan(plan_id=plan_id, polylines=(line,), image_size=(w, h))


def _dilate8(mask: np.ndarray) -> np.ndarray:
    out = mask.copy()
    out[1:, :] |= mask[:-1, :]
    out[:-1, :] |= mask[1:, :]
    out[:, 1:] |= mask[:, :-1]
    out[:, :-1] |= mask[:, 1:]
    out[1:, 1:] |= mask[:-1, :-1]
    out[1:, :-1] |= mask[:-1, 1:]
    out[:-1, 1:] |= mask[1:, :-1]
    out[:-1, :-1] |= mask[1:, 1:]
    return out


def _trace_meat_contour(mask: np.ndarray) -> list[tuple[int, int]]:
    """Ordered outer contour of the region containing the first row-major
    pixel, as (col, row) pairs. Thin regions revisit pixels; that is inherent
    to Moore tracing and harmless downstream."""
    h, w = mask.shape
    rows, cols = np.nonzero(mask)
    start = (int(cols[0]), int(rows[0]))

    def filled(p):
        return 0 <= p[0] < w and 0 <= p[1] < h and bool(mask[p[1], p[0]])

    backtrack = (start[0] - 1, start[1])
    contour = [start]
    cur = start
    seen_moves: set = set()
    limit = 8 * (rows.size + 1) + 8
    for _ in range(limit):
        bi = _MOORE.index((backtrack[0] - cur[0], backtrack[1] - cur[1]))
        nxt = None
        for k in range(1, 9):
            idx = (bi + k) % 8
            cand = (cur[0] + _MOORE[idx][0], cur[1] + _MOORE[idx][1])
            if filled(cand):
                nxt = cand
                backtrack = (cur[0] + _MOORE[(bi + k - 1) % 8][0],
                             cur[1] + _MOORE[(bi + k - 1) % 8][1])
                break
        if nxt is None:
            break  # isolated pixel
        move = (cur, nxt)
        if move in seen_moves:
            break  # directed edge repeats: contour closed
        seen_moves.add(move)
        contour.append(nxt)
        cur = nxt
    if len(contour) > 1 and contour[-1] == start:
        contour.pop()
    return contour


def _longest_cyclic_run(
    contour: list[tuple[int, int]], flags: list[bool]
) -> list[tuple[int, int]]:
    m = len(contour)
    if all(flags):
        if m >= 2:
            return contour + [contour[0]]  # closed ring
        return contour
    best_start, best_len = 0, 0
    run_start, run_len = None, 0
    for i in range(2 * m):
        if flags[i % m]:
            if run_start is None:
                run_start = i
                run_len = 0
            run_len += 1
            if run_len > best_len and run_len <= m:
                best_start, best_len = run_start, run_len
        else:
            run_start, run_len = None, 0
    return [contour[(best_start + k) % m] for k in range(best_len)]


def apply_edit(plan: CutPlan, edit: PlanEdit) -> CutPlan:
    """Apply one operator edit, returning a new plan (original untouched).

    The index addresses the flattened waypoint sequence across polylines; an
    insertion at a polyline boundary goes to the later polyline's start.
    """
    if plan.status not in (PlanStatus.PROPOSED, PlanStatus.EDITED):
        raise ValueError("plan frozen")
    w, h = plan.image_size
    lines = [list(pl.points) for pl in plan.polylines]
    offsets = []
    off = 0
    for pl in lines:
        offsets.append(off)
        off += len(pl)
    total = off

    def locate(index: int, for_insert: bool) -> tuple[int, int]:
        hi = total if for_insert else total - 1
        if index < 0 or index > hi:
            raise ValueError("waypoint index out of range")
        k = 0
        for i, o in enumerate(offsets):
            if index >= o:
                k = i
        local = index - offsets[k]
        return k, local

    if edit.op == "move":
        k, local = locate(edit.index, for_insert=False)
        if not _in_image(edit.point, w, h):
            raise ValueError("outside workspace image")
        lines[k][local] = edit.point
    elif edit.op == "add":
        if not _in_image(edit.point, w, h):
            raise ValueError("outside workspace image")
        k, local = locate(edit.index, for_insert=True)
        if local > len(lines[k]):
            local = len(lines[k])
        lines[k].insert(local, edit.point)
    else:  # remove
        k, local = locate(edit.index, for_insert=False)
        if len(lines[k]) <= 2:
            raise ValueError("degenerate plan")
        del lines[k][local]

    new_lines = tuple(Polyline(pl) for pl in lines)
    return replace(
        plan,
        polylines=new_lines,
        status=PlanStatus.EDITED,
        revision=plan.revision + 1,
        edits=plan.edits + (edit,),
    )


def approve_plan(plan: CutPlan) -> CutPlan:
    if plan.status not in (PlanStatus.PROPOSED, PlanStatus.EDITED):
        raise ValueError("plan frozen")
    return replace(plan, status=PlanStatus.APPROVED)


def reject_plan(plan: CutPlan) -> CutPlan:
    if plan.status not in (PlanStatus.PROPOSED, PlanStatus.EDITED):
        raise ValueError("plan frozen")
    return replace(plan, status=PlanStatus.REJECTED)


@dataclass(frozen=True)
class Calibration:
    """Pixel to robot-plane mapping plus the fixed knife depth plane."""

    h: Homography
    cut_height_z: float


@dataclass(frozen=True)
class RobotPath:
    """Waypoints in robot-plane centimeters at constant z."""

    points: tuple[tuple[float, float, float], ...]
    commanded_speed: float

    def __post_init__(self):
        if self.commanded_speed <= 0:
            raise ValueError("speed must be positive")
        if len(self.points) < 2:
            raise ValueError("path needs at least 2 points")
        z0 = self.points[0][2]
        for p, q in zip(self.points, self.points[1:]):
            if p == q:
                raise ValueError("repeated consecutive path point")
            if q[2] != z0:
                raise ValueError("z must be constant")

    def total_length(self) -> float:
        return sum(
            math.dist(p[:2], q[:2]) for p, q in zip(self.points, self.points[1:])
        )


def to_robot_path(plan: CutPlan, cal: Calibration, speed: float) -> RobotPath:
    """Map an approved plan's waypoints through the calibration homography,
    pinning z to the cut plane. Order (and count) preserved; polylines are
    concatenated, so inter-polyline segments are in-plane travel moves."""
    if plan.status is not PlanStatus.APPROVED:
        raise ValueError("unapproved plan")
    pts = []
    for line in plan.polylines:
        for p in line.points:
            q = homography_apply(cal.h, p)
            pts.append((q.x, q.y, cal.cut_height_z))
    return RobotPath(points=tuple(pts), commanded_speed=speed)


def plan_to_json(plan: CutPlan) -> str:
    doc = {
        "plan_id": plan.plan_id,
        "status": plan.status.value,
        "revision": plan.revision,
        "polylines": [
            [[p.x, p.y] for p in line.points] for line in plan.polylines
        ],
        "image_size": list(plan.image_size),
    }
    return json.dumps(doc, sort_keys=True)


def plan_from_json(text: str, image_size: Optional[tuple[int, int]] = None) -> CutPlan:
    doc = json.loads(text)
    size = tuple(doc.get("image_size") or image_size or (0, 0))
    if size == (0, 0):
        raise ValueError("plan json lacks image_size")
    lines = tuple(
        Polyline(Point2(float(x), float(y)) for x, y in line)
        for line in doc["polylines"]
    )
    return CutPlan(
        plan_id=doc["plan_id"],
        polylines=lines,
        image_size=size,  # type: ignore[arg-type]
        status=PlanStatus(doc["status"]),
        revision=int(doc["revision"]),
    )
