import math

import pytest

from cobot_cell.harness import (
    calibrate_beta_from_pairs,
    first_warning_entry_time,
    hand_trial_scenario,
    knife_calibration_base,
    knife_csv,
    knife_latency_closed_form,
    knife_trial_scenario,
    run_hand_trials,
    run_knife_trials,
    run_uncertainty_table,
)
from cobot_cell.uncertainty import psi


class TestGroundTruth:
    def test_entry_time_brackets_scripted_crossing(self):
        sc = hand_trial_scenario(seed=1, t_enter_target=1.25)
        t = first_warning_entry_time(sc)
        # the hand reaches the warning center at 1.25, so the first landmark
        # crossing is strictly earlier but well after the script start
        assert 0.2 < t < 1.25

    def test_entry_time_bisection_is_tight(self):
        from cobot_cell.geometry import point_in_polygon
        from cobot_cell.sim import landmarks_at

        sc = hand_trial_scenario(seed=2, t_enter_target=1.3)
        zones = sc.zone_config()
        t = first_warning_entry_time(sc)

        def inside(tt):
            return any(
                point_in_polygon(p, zones.warning)
                for p in landmarks_at(sc.hands, tt, sc.hand_scale)
            )

        assert inside(t)
        assert not inside(t - 1e-6)

    def test_missing_ground_truth_errors(self):
        sc = hand_trial_scenario(seed=1, t_enter_target=1.25)
        from dataclasses import replace

        with pytest.raises(ValueError, match="missing ground truth"):
            first_warning_entry_time(replace(sc, hands=()))


class TestHandTrials:
    def test_small_batch_perfect_detection(self):
        rep = run_hand_trials(trials=6, seed=42)
        assert rep.trials == 6
        assert rep.accuracy == 1.0
        assert rep.precision == 1.0
        assert rep.false_positives == 0
        assert len(rep.latencies) == 6
        bound = 1 / 60 + 1 / 500 + 1e-9
        assert all(0.0 < l <= bound for l in rep.latencies)

    def test_deterministic_reports(self):
        a = run_hand_trials(trials=3, seed=7)
        b = run_hand_trials(trials=3, seed=7)
        assert a.to_dict("hand") == b.to_dict("hand")

    def test_miss_rate_injects_false_negatives(self):
        rep = run_hand_trials(trials=4, seed=3, miss_rate=0.97)
        assert rep.false_negatives > 0
        assert rep.accuracy < 1.0


class TestKnifeTrials:
    def test_small_batch(self):
        rep, rows = run_knife_trials(trials=4, seed=42)
        assert rep.true_positives == 4
        assert rep.false_negatives == 0
        assert rep.false_positives == 0
        assert rep.accuracy == 1.0
        sc = knife_trial_scenario(0, True, 5.0)
        lo, hi = knife_latency_closed_form(sc)
        for lat in rep.latencies:
            assert lo - 1e-3 <= lat <= hi + 1e-3
        assert len(rows) == 4

    def test_csv_shape(self):
        _, rows = run_knife_trials(trials=2, seed=1)
        text = knife_csv(rows)
        lines = text.strip().split("\n")
        assert lines[0] == "trial_id,t_contact,t_detect,latency_s"
        assert len(lines) == 3

    def test_calibration_base_tracks_force_model(self):
        base = knife_calibration_base(seed=0)
        # normal cutting draws cluster near the configured mean
        assert 3.0 < base < 6.0


class TestUncertaintyTable:
    def test_default_table_monotone(self):
        table = run_uncertainty_table()
        assert table["families"]["translation_cm"]["strictly_increasing_psi"]
        assert table["families"]["rotation_deg"]["strictly_increasing_psi"]
        rows = {(r["kind"], r["magnitude"]): r for r in table["rows"]}
        assert rows[("translation_cm", 0.0)]["psi"] == 0.0
        # 45 degrees must read higher than 7 degrees
        assert (
            rows[("rotation_deg", 45.0)]["psi"] > rows[("rotation_deg", 7.0)]["psi"]
        )

    def test_translation_d_matches_pixel_pitch(self):
        table = run_uncertainty_table()
        for r in table["rows"]:
            if r["kind"] == "translation_cm":
                assert r["d_px"] == pytest.approx(r["magnitude"] / 0.1, abs=1.0)

    def test_rotation_d_matches_chord(self):
        table = run_uncertainty_table()
        r_half_diag = math.hypot(120, 50)  # loin is 240 x 100 px
        for r in table["rows"]:
            if r["kind"] == "rotation_deg" and r["magnitude"] > 0:
                expect = 2 * r_half_diag * math.sin(math.radians(r["magnitude"]) / 2)
                assert r["d_px"] == pytest.approx(expect, rel=0.05)


class TestCalibrateBeta:
    def test_roundtrip(self):
        truth = 0.08
        pairs = [{"d": d, "psi": psi(d, truth)} for d in (4.0, 9.0, 14.0)]
        out = calibrate_beta_from_pairs(pairs)
        assert out["beta"] == pytest.approx(truth, rel=1e-9)
