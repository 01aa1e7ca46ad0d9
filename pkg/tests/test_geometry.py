import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from cobot_cell.geometry import (
    Homography,
    OrientedBox,
    Point2,
    Polygon,
    Polyline,
    homography_apply,
    homography_fit,
    min_area_box,
    point_in_polygon,
    simplify_polyline,
)


def unit_square():
    return Polygon((Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)))


def oracle_min_area(points):
    """Independent rotating-calipers oracle: scipy hull + AABB area over every
    hull-edge orientation."""
    pts = np.array([[p.x, p.y] for p in points])
    hull = ConvexHull(pts)
    verts = pts[hull.vertices]
    best = math.inf
    n = len(verts)
    for i in range(n):
        e = verts[(i + 1) % n] - verts[i]
        ang = math.atan2(e[1], e[0])
        c, s = math.cos(-ang), math.sin(-ang)
        rx = c * pts[:, 0] - s * pts[:, 1]
        ry = s * pts[:, 0] + c * pts[:, 1]
        best = min(best, (rx.max() - rx.min()) * (ry.max() - ry.min()))
    return best


def assert_point_sets_close(a, b, tol=1e-6):
    assert len(a) == len(b)
    remaining = list(b)
    for p in a:
        hit = min(remaining, key=lambda q: math.hypot(p.x - q.x, p.y - q.y))
        assert math.hypot(p.x - hit.x, p.y - hit.y) <= tol
        remaining.remove(hit)


class TestPointInPolygon:
    def test_interior(self):
        assert point_in_polygon(Point2(0.5, 0.5), unit_square())

    def test_exterior(self):
        assert not point_in_polygon(Point2(2, 2), unit_square())

    def test_boundary_counts_inside(self):
        assert point_in_polygon(Point2(1.0, 0.5), unit_square())
        assert point_in_polygon(Point2(0.0, 0.0), unit_square())

    @given(
        st.floats(-3, 3), st.floats(-3, 3),
        st.floats(-50, 50), st.floats(-50, 50),
    )
    @settings(max_examples=100)
    def test_translation_invariant(self, px, py, dx, dy):
        poly = unit_square()
        shifted = Polygon(Point2(v.x + dx, v.y + dy) for v in poly.vertices)
        p = Point2(px, py)
        q = Point2(px + dx, py + dy)
        # stay off the boundary: float shifts can flip exact-edge verdicts
        if min(abs(px), abs(py), abs(px - 1), abs(py - 1)) < 1e-6:
            return
        assert point_in_polygon(p, poly) == point_in_polygon(q, shifted)


class TestMinAreaBox:
    def test_square_is_its_own_box(self):
        pts = [Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)]
        box = min_area_box(pts)
        assert box.area() == pytest.approx(1.0, abs=1e-9)
        assert_point_sets_close(box.corners, pts, tol=1e-9)

    def test_canonical_corner_order(self):
        box = min_area_box(
            [Point2(0, 0), Point2(2, 0), Point2(2, 1), Point2(0, 1)]
        )
        assert box.corners[0] == Point2(0, 0)
        assert box.corners[1] == Point2(2, 0)
        assert box.corners[2] == Point2(2, 1)
        assert box.corners[3] == Point2(0, 1)

    def test_rotated_square(self):
        c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
        pts = [
            Point2(c * x - s * y, s * x + c * y)
            for x, y in ((0, 0), (1, 0), (1, 1), (0, 1))
        ]
        box = min_area_box(pts)
        assert box.area() == pytest.approx(oracle_min_area(pts), abs=1e-9)
        assert box.area() == pytest.approx(1.0, abs=1e-9)

    def test_collinear_degenerate(self):
        box = min_area_box([Point2(0, 0), Point2(1, 0), Point2(2, 0)])
        lengths = sorted(
            a.distance_to(b)
            for a, b in zip(box.corners, box.corners[1:] + box.corners[:1])
        )
        assert lengths[0] == pytest.approx(0.0, abs=1e-12)
        assert lengths[-1] == pytest.approx(2.0, abs=1e-12)

    def test_single_point(self):
        box = min_area_box([Point2(3, 4)])
        assert all(c == Point2(3, 4) for c in box.corners)

    def test_empty_errors(self):
        with pytest.raises(ValueError, match="empty point set"):
            min_area_box([])

    def test_matches_oracle_and_bounds_aabb(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            pts = [
                Point2(float(x), float(y))
                for x, y in rng.uniform(-10, 10, size=(rng.integers(3, 30), 2))
            ]
            box = min_area_box(pts)
            assert box.area() == pytest.approx(oracle_min_area(pts), rel=1e-9, abs=1e-9)
            xs = [p.x for p in pts]
            ys = [p.y for p in pts]
            aabb = (max(xs) - min(xs)) * (max(ys) - min(ys))
            assert box.area() <= aabb + 1e-9
            assert all(box.contains(p, tol=1e-7) for p in pts)

    def test_rotation_equivariant(self):
        rng = np.random.default_rng(11)
        pts = [Point2(float(x), float(y)) for x, y in rng.uniform(0, 5, (12, 2))]
        box = min_area_box(pts)
        for theta in (0.3, 1.1, 2.0):
            c, s = math.cos(theta), math.sin(theta)
            rot = [Point2(c * p.x - s * p.y, s * p.x + c * p.y) for p in pts]
            rot_box = min_area_box(rot)
            expected = [
                Point2(c * p.x - s * p.y, s * p.x + c * p.y) for p in box.corners
            ]
            assert_point_sets_close(rot_box.corners, expected, tol=1e-6)


class TestOrientedBox:
    def test_rejects_non_rectangle(self):
        with pytest.raises(ValueError):
            OrientedBox((Point2(0, 0), Point2(2, 0), Point2(1, 1), Point2(0, 1)))

    def test_canonicalizes_any_cyclic_order(self):
        corners = (Point2(1, 1), Point2(0, 1), Point2(0, 0), Point2(1, 0))
        box = OrientedBox(corners)
        assert box.corners[0] == Point2(0, 0)
        assert box.corners[1] == Point2(1, 0)


class TestSimplifyPolyline:
    def test_collinear_drops_middle(self):
        line = Polyline((Point2(0, 0), Point2(1, 0), Point2(2, 0)))
        out = simplify_polyline(line, 0.01)
        assert [p.as_tuple() for p in out.points] == [(0, 0), (2, 0)]

    def test_right_angle_kept(self):
        line = Polyline((Point2(0, 0), Point2(1, 0), Point2(1, 1)))
        out = simplify_polyline(line, 0.1)
        assert len(out.points) == 3

    def test_epsilon_zero_removes_only_collinear(self):
        line = Polyline(
            (Point2(0, 0), Point2(1, 0), Point2(2, 1e-9), Point2(3, 0))
        )
        out = simplify_polyline(line, 0.0)
        assert len(out.points) == 4  # tiny deviation is still deviation

    def _max_deviation(self, original, kept):
        """Brute-force deviation oracle: every input point against every
        retained segment."""
        def seg_dist(p, a, b):
            dx, dy = b.x - a.x, b.y - a.y
            den = dx * dx + dy * dy
            if den == 0:
                return p.distance_to(a)
            t = max(0.0, min(1.0, ((p.x - a.x) * dx + (p.y - a.y) * dy) / den))
            return math.hypot(p.x - a.x - t * dx, p.y - a.y - t * dy)

        worst = 0.0
        for p in original:
            best = min(
                seg_dist(p, a, b) for a, b in zip(kept, kept[1:])
            )
            worst = max(worst, best)
        return worst

    def test_noisy_arc_deviation_bound(self):
        rng = np.random.default_rng(3)
        pts = []
        for i in range(100):
            ang = math.pi * i / 99
            r = 10 + rng.normal(0, 0.2)
            pts.append(Point2(r * math.cos(ang), r * math.sin(ang)))
        line = Polyline(pts)
        out = simplify_polyline(line, 0.5)
        assert len(out.points) < len(pts)
        assert out.points[0] == pts[0] and out.points[-1] == pts[-1]
        assert self._max_deviation(pts, out.points) <= 0.5 + 1e-12

    def test_output_is_subsequence(self):
        rng = np.random.default_rng(9)
        pts = [Point2(float(i), float(rng.normal())) for i in range(50)]
        out = simplify_polyline(Polyline(pts), 0.8)
        it = iter(pts)
        assert all(p in it for p in out.points)
        assert self._max_deviation(pts, out.points) <= 0.8 + 1e-12


class TestHomography:
    def test_identity_fit(self):
        pts = [Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)]
        h = homography_fit(pts, pts)
        assert np.allclose(h.m, np.eye(3), atol=1e-9)

    def test_translation_fit(self):
        src = [Point2(0, 0), Point2(4, 0), Point2(4, 3), Point2(0, 3)]
        dst = [Point2(p.x + 5, p.y - 3) for p in src]
        h = homography_fit(src, dst)
        expected = np.array([[1, 0, 5], [0, 1, -3], [0, 0, 1]], dtype=float)
        assert np.allclose(h.m, expected, atol=1e-9)

    def _random_homography(self, rng):
        m = np.eye(3) + rng.uniform(-0.2, 0.2, (3, 3))
        m[2, 0:2] = rng.uniform(-1e-3, 1e-3, 2)
        m[2, 2] = 1.0
        return Homography(m)

    def test_generate_then_fit_roundtrip(self):
        rng = np.random.default_rng(17)
        for _ in range(10):
            truth = self._random_homography(rng)
            src = [Point2(float(x), float(y)) for x, y in rng.uniform(0, 100, (8, 2))]
            dst = [homography_apply(truth, p) for p in src]
            got = homography_fit(src, dst)
            assert np.allclose(got.m, truth.m, atol=1e-6)
            held_out = Point2(float(rng.uniform(0, 100)), float(rng.uniform(0, 100)))
            a = homography_apply(got, held_out)
            b = homography_apply(truth, held_out)
            assert math.hypot(a.x - b.x, a.y - b.y) < 1e-6

    def test_four_point_exactness(self):
        rng = np.random.default_rng(23)
        truth = self._random_homography(rng)
        src = [Point2(0, 0), Point2(10, 1), Point2(9, 12), Point2(-1, 11)]
        dst = [homography_apply(truth, p) for p in src]
        got = homography_fit(src, dst)
        for s, d in zip(src, dst):
            out = homography_apply(got, s)
            assert math.hypot(out.x - d.x, out.y - d.y) < 1e-6

    def test_degenerate_configuration(self):
        src = [Point2(0, 0), Point2(1, 1), Point2(2, 2), Point2(3, 3)]
        dst = [Point2(0, 0), Point2(1, 0), Point2(2, 0), Point2(3, 1)]
        with pytest.raises(ValueError, match="degenerate"):
            homography_fit(src, dst)

    def test_apply_identity_and_scale(self):
        ident = Homography.identity()
        assert homography_apply(ident, Point2(3, 4)) == Point2(3, 4)
        scale = Homography(np.diag([2.0, 2.0, 1.0]))
        assert homography_apply(scale, Point2(1, 1)) == Point2(2, 2)

    def test_point_at_infinity(self):
        h = Homography(np.array([[1.0, 0, 0], [0, 1.0, 0], [1.0, 0, 1.0]]))
        with pytest.raises(ValueError, match="point at infinity"):
            homography_apply(h, Point2(-1.0, 0.0))

    def test_normalized_m22(self):
        h = Homography(np.diag([3.0, 3.0, 3.0]))
        assert h.m[2, 2] == 1.0
