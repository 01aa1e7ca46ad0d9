import json
from pathlib import Path

import pytest

from cobot_cell.cli import EXIT_ASSERT, EXIT_OK, EXIT_SCENARIO, main

REPO = Path(__file__).resolve().parents[1]


class TestRunCommand:
    def test_run_writes_episode_log(self, tmp_path, capsys):
        log_path = tmp_path / "episode.jsonl"
        code = main(
            ["run", "--scenario", str(REPO / "scenarios/demo_slice_bone.json"),
             "--log", str(log_path)]
        )
        assert code == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert summary["final_state"] == "estopped_contact"
        lines = log_path.read_text().strip().split("\n")
        entry = json.loads(lines[-1])
        assert set(entry) == {"t", "kind", "state", "zone", "led",
                              "vx", "vy", "vz"}

    def test_missing_scenario_exit_2(self):
        assert main(["run", "--scenario", "/nonexistent.json"]) == EXIT_SCENARIO

    def test_bad_scenario_exit_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{\"seed\": 1}")
        assert main(["run", "--scenario", str(bad)]) == EXIT_SCENARIO


class TestExperimentCommand:
    def test_uncertainty_out_file(self, tmp_path):
        out = tmp_path / "table.json"
        code = main(
            ["experiment", "uncertainty", "--out", str(out), "--assert"]
        )
        assert code == EXIT_OK
        table = json.loads(out.read_text())
        assert table["families"]["translation_cm"]["strictly_increasing_psi"]

    def test_hand_assert_small(self, tmp_path):
        out = tmp_path / "hand.json"
        code = main(
            ["experiment", "hand", "--trials", "3", "--seed", "5",
             "--out", str(out), "--assert"]
        )
        assert code == EXIT_OK
        doc = json.loads(out.read_text())
        assert doc["precision"] == 1.0
        assert doc["trials"] == 3

    def test_hand_assert_fails_with_miss_rate(self, tmp_path):
        out = tmp_path / "hand.json"
        code = main(
            ["experiment", "hand", "--trials", "3", "--seed", "5",
             "--miss-rate", "0.97", "--out", str(out), "--assert"]
        )
        assert code == EXIT_ASSERT

    def test_knife_with_csv(self, tmp_path):
        out = tmp_path / "knife.json"
        csv = tmp_path / "contacts.csv"
        code = main(
            ["experiment", "knife", "--trials", "2", "--seed", "3",
             "--out", str(out), "--csv", str(csv), "--assert"]
        )
        assert code == EXIT_OK
        assert csv.read_text().startswith("trial_id,t_contact,t_detect,latency_s")

    def test_reports_are_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["experiment", "hand", "--trials", "2", "--seed", "9", "--out", str(a)])
        main(["experiment", "hand", "--trials", "2", "--seed", "9", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()


class TestCalibrateBeta:
    def test_pairs_file(self, tmp_path, capsys):
        pairs = tmp_path / "pairs.json"
        pairs.write_text(json.dumps([{"d": 10.0, "psi": 0.5}]))
        assert main(["calibrate-beta", "--pairs", str(pairs)]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["beta"] == pytest.approx(0.05493, rel=1e-3)

    def test_missing_pairs_exit_2(self):
        assert main(["calibrate-beta", "--pairs", "/nope.json"]) == EXIT_SCENARIO
