import itertools

import pytest

from cobot_cell.geometry import Point2
from cobot_cell.perception import (
    HandFrame,
    TracePlayback,
    ZoneConfig,
    ZoneState,
    classify_zone,
    play_trace,
)
from cobot_cell.scenario import default_zones, rect


@pytest.fixture
def zones():
    # warning box nested inside the safe box, both inside a 200x200 image
    return ZoneConfig(
        warning=rect(80, 80, 120, 120),
        safe=rect(40, 40, 160, 160),
        image_size=(200, 200),
    )


def frame(*pts, t=0.0):
    return HandFrame(t=t, landmarks=tuple(Point2(x, y) for x, y in pts))


class TestClassifyZone:
    def test_warning_hit(self, zones):
        assert classify_zone(frame((100, 100)), zones) is ZoneState.WARNING

    def test_all_outside_is_clear(self, zones):
        pts = [(5 + i, 5) for i in range(21)]
        assert classify_zone(frame(*pts), zones) is ZoneState.CLEAR

    def test_warning_precedence_over_safe(self, zones):
        assert (
            classify_zone(frame((50, 50), (100, 100)), zones) is ZoneState.WARNING
        )

    def test_safe_only(self, zones):
        assert classify_zone(frame((50, 50)), zones) is ZoneState.SAFE

    def test_empty_frame_clear(self, zones):
        assert classify_zone(frame(), zones) is ZoneState.CLEAR

    def test_out_of_frame_landmarks_ignored(self, zones):
        assert classify_zone(frame((-5, 100), (100, 250)), zones) is ZoneState.CLEAR

    def test_adding_landmark_never_decreases_severity(self, zones):
        base = [(50, 50)]
        extra = [(5, 5), (100, 100), (150, 150)]
        sev0 = classify_zone(frame(*base), zones)
        for e in extra:
            assert classify_zone(frame(*base, e), zones) >= sev0

    def test_permutation_invariant(self, zones):
        pts = [(5, 5), (50, 50), (100, 100)]
        results = {
            classify_zone(frame(*perm), zones)
            for perm in itertools.permutations(pts)
        }
        assert len(results) == 1

    def test_inward_path_is_prefix_monotone(self):
        zones = default_zones((640, 480))
        states = []
        for i in range(100):
            x = 630 - i * (630 - 320) / 99.0
            y = 50 + i * (240 - 50) / 99.0
            states.append(classify_zone(frame((x, y)), zones))
        # CLEAR... SAFE... WARNING with no regressions on the way in
        assert states[0] is ZoneState.CLEAR
        assert states[-1] is ZoneState.WARNING
        assert all(b >= a for a, b in zip(states, states[1:]))


class TestTracePlayback:
    def test_empty_trace(self):
        pb = TracePlayback(())
        assert pb.poll(10.0) == []
        assert pb.exhausted()

    def test_three_frames_on_grid(self):
        frames = [frame((0, 0), t=k / 60.0) for k in range(3)]
        pb = TracePlayback(tuple(frames))
        out = []
        for k in range(3):
            out.extend(pb.poll(k / 60.0))
        assert out == frames

    def test_nothing_between_frames(self):
        frames = [frame((0, 0), t=0.0), frame((1, 1), t=1.0)]
        pb = TracePlayback(tuple(frames))
        assert len(pb.poll(0.5)) == 1
        assert pb.poll(0.9) == []
        assert len(pb.poll(1.0)) == 1

    def test_unordered_trace_rejected(self):
        frames = (frame((0, 0), t=1.0), frame((0, 0), t=1.0))
        with pytest.raises(ValueError, match="unordered trace"):
            TracePlayback(frames)

    def test_scripted_scenario_count_and_order(self):
        # order/count oracle over a long scripted trace
        frames = [frame((i, i), t=i / 60.0) for i in range(50)]
        ticks = [k / 60.0 for k in range(60)]
        emitted = list(play_trace(frames, ticks))
        assert len(emitted) == 50
        assert [f.t for _, f in emitted] == [f.t for f in frames]
