"""Planar geometry shared by every other module: points, polygons, oriented
boxes, polyline simplification, and plane homographies.

All coordinates are plain floats. Image space is pixels with y growing
downward; robot-plane space is centimeters. A container never mixes the two;
which space applies is carried by the caller's context.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

_EPS = 1e-12


@dataclass(frozen=True)
class Point2:
    """A finite 2D point."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("non-finite point")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def _cross(o, a, b) -> float:
    """z-component of (a-o) x (b-o)."""
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


@dataclass(frozen=True)
class Polyline:
    """An ordered open chain of >= 2 points with no repeated consecutive point."""

    points: tuple[Point2, ...]

    def __init__(self, points: Iterable[Point2]):
        pts = tuple(points)
        if len(pts) < 2:
            raise ValueError("polyline needs at least 2 points")
        for a, b in zip(pts, pts[1:]):
            if a.x == b.x and a.y == b.y:
                raise ValueError("repeated consecutive point")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def length(self) -> float:
        return sum(a.distance_to(b) for a, b in zip(self.points, self.points[1:]))


@dataclass(frozen=True)
class Polygon:
    """A simple polygon, orientation normalized counter-clockwise (positive
    shoelace sign on the raw coordinates) at construction."""

    vertices: tuple[Point2, ...]

    def __init__(self, vertices: Iterable[Point2]):
        verts = tuple(vertices)
        if len(verts) >= 2 and verts[0].as_tuple() == verts[-1].as_tuple():
            verts = verts[:-1]  # tolerate closed rings
        if len(verts) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        for a, b in zip(verts, verts[1:] + verts[:1]):
            if a.x == b.x and a.y == b.y:
                raise ValueError("repeated consecutive vertex")
        area2 = _signed_area2(verts)
        if abs(area2) < _EPS:
            raise ValueError("degenerate polygon")
        if not _is_simple(verts):
            raise ValueError("polygon not simple")
        if area2 < 0:
            verts = verts[::-1]
        object.__setattr__(self, "vertices", verts)

    def area(self) -> float:
        return 0.5 * abs(_signed_area2(self.vertices))

    def centroid(self) -> Point2:
        """Area centroid."""
        cx = cy = 0.0
        a2 = _signed_area2(self.vertices)
        for p, q in zip(self.vertices, self.vertices[1:] + self.vertices[:1]):
            w = p.x * q.y - q.x * p.y
            cx += (p.x + q.x) * w
            cy += (p.y + q.y) * w
        return Point2(cx / (3.0 * a2), cy / (3.0 * a2))

    def bounds(self) -> tuple[float, float, float, float]:
        xs = [v.x for v in self.vertices]
        ys = [v.y for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)


def _signed_area2(verts: Sequence[Point2]) -> float:
    s = 0.0
    for p, q in zip(verts, tuple(verts[1:]) + (verts[0],)):
        s += p.x * q.y - q.x * p.y
    return s


def _segments_properly_intersect(p1, p2, p3, p4) -> bool:
    d1 = _cross(p3, p4, p1)
    d2 = _cross(p3, p4, p2)
    d3 = _cross(p1, p2, p3)
    d4 = _cross(p1, p2, p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _is_simple(verts: Sequence[Point2]) -> bool:
    n = len(verts)
    segs = [(verts[i].as_tuple(), verts[(i + 1) % n].as_tuple()) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # adjacent edges share an endpoint
            if _segments_properly_intersect(*segs[i], *segs[j]):
                return False
    return True


@dataclass(frozen=True)
class OrientedBox:
    """A rectangle given by its 4 corners in canonical order.

    Canonical order starts at the corner with smallest y (ties broken by
    smallest x) and proceeds clockwise as seen in image coordinates
    (y growing downward). Degenerate boxes (zero width and/or height)
    are permitted.
    """

    corners: tuple[Point2, ...]

    def __init__(self, corners: Iterable[Point2]):
        cs = tuple(corners)
        if len(cs) != 4:
            raise ValueError("oriented box needs exactly 4 corners")
        _check_rectangle(cs)
        object.__setattr__(self, "corners", _canonical_order(cs))

    def center(self) -> Point2:
        return Point2(
            sum(c.x for c in self.corners) / 4.0,
            sum(c.y for c in self.corners) / 4.0,
        )

    def area(self) -> float:
        a = self.corners[0].distance_to(self.corners[1])
        b = self.corners[1].distance_to(self.corners[2])
        return a * b

    def contains(self, p: Point2, tol: float = 1e-9) -> bool:
        """Inside-or-on test with absolute tolerance, robust for degenerate boxes."""
        c0 = self.corners[0]
        u = (self.corners[1].x - c0.x, self.corners[1].y - c0.y)
        v = (self.corners[3].x - c0.x, self.corners[3].y - c0.y)
        lu = math.hypot(*u)
        lv = math.hypot(*v)
        d = (p.x - c0.x, p.y - c0.y)
        if lu < tol and lv < tol:
            return math.hypot(*d) <= tol
        if lu < tol or lv < tol:
            a, b = self.corners[0], self.corners[2]
            return _point_segment_distance(p, a, b) <= tol
        for axis, ln in ((u, lu), (v, lv)):
            t = (d[0] * axis[0] + d[1] * axis[1]) / ln
            if t < -tol or t > ln + tol:
                return False
        return True


def _check_rectangle(cs: Sequence[Point2]) -> None:
    sides = [
        (cs[(i + 1) % 4].x - cs[i].x, cs[(i + 1) % 4].y - cs[i].y) for i in range(4)
    ]
    lens = [math.hypot(*s) for s in sides]
    scale = max(lens)
    if scale == 0.0:
        return  # fully degenerate point box
    rtol = 1e-6 * scale
    if abs(lens[0] - lens[2]) > rtol or abs(lens[1] - lens[3]) > rtol:
        raise ValueError("corners do not form a rectangle")
    # perpendicularity only checkable on non-degenerate adjacent sides
    for i in range(4):
        a, b = sides[i], sides[(i + 1) % 4]
        la, lb = lens[i], lens[(i + 1) % 4]
        if la > rtol and lb > rtol:
            if abs(a[0] * b[0] + a[1] * b[1]) > 1e-6 * la * lb:
                raise ValueError("adjacent sides not perpendicular")


def _canonical_order(cs: Sequence[Point2]) -> tuple[Point2, ...]:
    """Deterministic corner relabeling; assumes cs is in some cyclic order."""
    start = min(range(4), key=lambda i: (cs[i].y, cs[i].x))
    fwd = tuple(cs[(start + k) % 4] for k in range(4))
    bwd = tuple(cs[(start - k) % 4] for k in range(4))
    area2 = _signed_area2(fwd)
    if area2 > _EPS:
        return fwd
    if area2 < -_EPS:
        return bwd
    # degenerate: pick lexicographically smaller sequence for determinism
    key = lambda seq: tuple((p.y, p.x) for p in seq)
    return fwd if key(fwd) <= key(bwd) else bwd


def point_in_polygon(p: Point2, poly: Polygon) -> bool:
    """Inside-or-on-boundary test; boundary counts as inside (safety leans
    toward detection)."""
    verts = poly.vertices
    n = len(verts)
    # boundary check first
    for i in range(n):
        a = verts[i]
        b = verts[(i + 1) % n]
        if _point_segment_distance(p, a, b) <= 1e-9:
            return True
    inside = False
    j = n - 1
    for i in range(n):
        xi, yi = verts[i].x, verts[i].y
        xj, yj = verts[j].x, verts[j].y
        if (yi > p.y) != (yj > p.y):
            x_cross = (xj - xi) * (p.y - yi) / (yj - yi) + xi
            if p.x < x_cross:
                inside = not inside
        j = i
    return inside


def _point_segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    dx, dy = b.x - a.x, b.y - a.y
    den = dx * dx + dy * dy
    if den == 0.0:
        return p.distance_to(a)
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / den
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return math.hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy))


def _convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Monotone chain; returns hull vertices counter-clockwise (shoelace sign),
    2 points when all inputs are collinear, 1 when coincident."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    def build(seq):
        h: list[tuple[float, float]] = []
        for p in seq:
            while len(h) >= 2 and _cross(h[-2], h[-1], p) <= 0:
                h.pop()
            h.append(p)
        return h
    lower = build(pts)
    upper = build(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 2:  # all collinear collapses the chains
        return [pts[0], pts[-1]]
    return hull


def min_area_box(points: Sequence[Point2]) -> OrientedBox:
    """Minimum-area enclosing rectangle of a point set.

    Collinear and single-point inputs yield a degenerate (zero width or zero
    size) box so downstream displacement never aborts on thin masks.
    """
    if len(points) == 0:
        raise ValueError("empty point set")
    raw = [(p.x, p.y) for p in points]
    hull = _convex_hull(raw)
    if len(hull) == 1:
        p = Point2(*hull[0])
        return OrientedBox((p, p, p, p))
    if len(hull) == 2:
        a, b = Point2(*hull[0]), Point2(*hull[1])
        return OrientedBox((a, b, b, a))
    best = None
    for i in range(len(hull)):
        ax, ay = hull[i]
        bx, by = hull[(i + 1) % len(hull)]
        ex, ey = bx - ax, by - ay
        norm = math.hypot(ex, ey)
        ux, uy = ex / norm, ey / norm
        s_vals = [px * ux + py * uy for px, py in hull]
        t_vals = [-px * uy + py * ux for px, py in hull]
        smin, smax = min(s_vals), max(s_vals)
        tmin, tmax = min(t_vals), max(t_vals)
        area = (smax - smin) * (tmax - tmin)
        if best is None or area < best[0] - _EPS:
            best = (area, ux, uy, smin, smax, tmin, tmax)
    _, ux, uy, smin, smax, tmin, tmax = best
    def back(s, t):
        return Point2(s * ux - t * uy, s * uy + t * ux)
    corners = (back(smin, tmin), back(smax, tmin), back(smax, tmax), back(smin, tmax))
    return OrientedBox(corners)


def simplify_polyline(path: Polyline, epsilon: float) -> Polyline:
    """Drop waypoints whose perpendicular deviation from the retained chain is
    within epsilon (recursive max-deviation splitting). Endpoints are always
    kept; output is a subsequence of the input."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    pts = path.points
    n = len(pts)
    keep = [False] * n
    keep[0] = keep[-1] = True
    closed = pts[0].as_tuple() == pts[-1].as_tuple()
    if closed and n > 2:
        # force a split point so a closed ring cannot collapse onto itself
        far = max(range(1, n - 1), key=lambda k: pts[k].distance_to(pts[0]))
        keep[far] = True
        spans = [(0, far), (far, n - 1)]
    else:
        spans = [(0, n - 1)]
    while spans:
        i, j = spans.pop()
        if j <= i + 1:
            continue
        dmax, imax = -1.0, -1
        for k in range(i + 1, j):
            d = _point_segment_distance(pts[k], pts[i], pts[j])
            if d > dmax:
                dmax, imax = d, k
        if dmax > epsilon:
            keep[imax] = True
            spans.append((i, imax))
            spans.append((imax, j))
    return Polyline(p for p, k in zip(pts, keep) if k)


@dataclass(frozen=True)
class Homography:
    """Invertible plane homography, normalized so m[2][2] == 1."""

    m: np.ndarray

    def __init__(self, m):
        arr = np.asarray(m, dtype=float)
        if arr.shape != (3, 3):
            raise ValueError("homography must be 3x3")
        if not np.all(np.isfinite(arr)):
            raise ValueError("non-finite homography")
        if abs(arr[2, 2]) < _EPS:
            raise ValueError("cannot normalize homography")
        arr = arr / arr[2, 2]
        if abs(np.linalg.det(arr)) <= 1e-12:
            raise ValueError("singular homography")
        arr.setflags(write=False)
        object.__setattr__(self, "m", arr)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self.m))

    @staticmethod
    def identity() -> "Homography":
        return Homography(np.eye(3))

    @staticmethod
    def scale(s: float) -> "Homography":
        return Homography(np.diag([float(s), float(s), 1.0]))


def homography_fit(src: Sequence[Point2], dst: Sequence[Point2]) -> Homography:
    """Least-squares plane homography from >= 4 correspondences (normalized DLT).

    Exact (residual below 1e-9) when the correspondences are exactly
    homographic. Raises on degenerate configurations (3 collinear of 4, etc.).
    """
    if len(src) != len(dst):
        raise ValueError("src/dst length mismatch")
    if len(src) < 4:
        raise ValueError("need at least 4 correspondences")
    s = np.array([[p.x, p.y] for p in src], dtype=float)
    d = np.array([[p.x, p.y] for p in dst], dtype=float)
    ts, s_n = _normalize_points(s)
    td, d_n = _normalize_points(d)
    n = len(src)
    a = np.zeros((2 * n, 9))
    for i in range(n):
        x, y = s_n[i]
        u, v = d_n[i]
        a[2 * i] = [-x, -y, -1, 0, 0, 0, u * x, u * y, u]
        a[2 * i + 1] = [0, 0, 0, -x, -y, -1, v * x, v * y, v]
    _, sigma, vt = np.linalg.svd(a)
    # a second vanishing singular value means a solution family: degenerate input
    if sigma[0] < _EPS or sigma[min(7, len(sigma) - 1)] < 1e-10 * sigma[0]:
        raise ValueError("degenerate correspondences")
    h_n = vt[-1].reshape(3, 3)
    h = np.linalg.inv(td) @ h_n @ ts
    if abs(h[2, 2]) < _EPS:
        raise ValueError("degenerate correspondences")
    try:
        return Homography(h)
    except ValueError as exc:
        raise ValueError("degenerate correspondences") from exc


def _normalize_points(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hartley normalization: centroid at origin, mean distance sqrt(2)."""
    c = p.mean(axis=0)
    shifted = p - c
    mean_dist = np.mean(np.hypot(shifted[:, 0], shifted[:, 1]))
    s = math.sqrt(2.0) / mean_dist if mean_dist > _EPS else 1.0
    t = np.array([[s, 0, -s * c[0]], [0, s, -s * c[1]], [0, 0, 1]])
    return t, shifted * s


def homography_apply(h: Homography, p: Point2) -> Point2:
    """Projective application with w-division."""
    v = h.m @ np.array([p.x, p.y, 1.0])
    if abs(v[2]) < 1e-12:
        raise ValueError("point at infinity")
    return Point2(v[0] / v[2], v[1] / v[2])
