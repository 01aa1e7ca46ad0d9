"""Hand-landmark frames, zone classification, and scripted trace playback.

The live landmark detector sits behind an adapter boundary: this module only
consumes landmark traces, either recorded or synthesized by the simulator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

from .geometry import Point2, Polygon, point_in_polygon

MAX_LANDMARKS = 21


class ZoneState(IntEnum):
    """Severity-ordered zone classification."""

    CLEAR = 0
    SAFE = 1
    WARNING = 2

    @property
    def wire_name(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class HandFrame:
    """Up to 21 image-space landmarks sampled at one instant."""

    t: float
    landmarks: tuple[Point2, ...]
    source_id: int = 0

    def __post_init__(self):
        if len(self.landmarks) > MAX_LANDMARKS:
            raise ValueError("too many landmarks")
        object.__setattr__(self, "landmarks", tuple(self.landmarks))


@dataclass(frozen=True)
class ZoneConfig:
    """Warning and safe zone polygons in image pixels.

    The zones may overlap; WARNING takes precedence over SAFE so overlap
    resolves toward the more severe classification.
    """

    warning: Polygon
    safe: Polygon
    image_size: tuple[int, int]

    def __post_init__(self):
        w, h = self.image_size
        if w <= 0 or h <= 0:
            raise ValueError("image_size must be positive")
        for poly in (self.warning, self.safe):
            x0, y0, x1, y1 = poly.bounds()
            if x0 < 0 or y0 < 0 or x1 > w - 1 or y1 > h - 1:
                raise ValueError("zone polygon outside image bounds")


def classify_zone(frame: HandFrame, zones: ZoneConfig) -> ZoneState:
    """WARNING if any in-frame landmark is inside the warning polygon, else
    SAFE if any is inside the safe polygon, else CLEAR.

    Out-of-frame landmarks are ignored rather than rejected: partial hand
    visibility is routine. An empty landmark set is CLEAR (no detection means
    the system may operate).
    """
    w, h = zones.image_size
    severity = ZoneState.CLEAR
    for p in frame.landmarks:
        if p.x < 0 or p.y < 0 or p.x > w - 1 or p.y > h - 1:
            continue
        if point_in_polygon(p, zones.warning):
            return ZoneState.WARNING
        if severity < ZoneState.SAFE and point_in_polygon(p, zones.safe):
            severity = ZoneState.SAFE
    return severity


@dataclass
class TracePlayback:
    """Re-emits a recorded landmark trace as the simulation clock advances.

    Single producer: `poll(now)` returns every not-yet-emitted frame whose
    timestamp is <= now, in order. Nothing is emitted between frames, which
    models the fixed-rate sampling of the safety loop.
    """

    trace: Sequence[HandFrame]
    _next: int = field(default=0, init=False)

    def __post_init__(self):
        ts = [f.t for f in self.trace]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("unordered trace")

    def poll(self, now: float) -> list[HandFrame]:
        due: list[HandFrame] = []
        while self._next < len(self.trace) and self.trace[self._next].t <= now + 1e-12:
            due.append(self.trace[self._next])
            self._next += 1
        return due

    def exhausted(self) -> bool:
        return self._next >= len(self.trace)


def play_trace(trace: Iterable[HandFrame], clock_ticks: Iterable[float]):
    """Generator form of playback: yields (t, frame) pairs as each clock tick
    releases pending frames."""
    playback = TracePlayback(tuple(trace))
    for now in clock_ticks:
        for frame in playback.poll(now):
            yield now, frame
