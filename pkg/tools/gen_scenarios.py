"""Regenerate the example scenario files under scenarios/."""

from pathlib import Path

from cobot_cell.harness import (
    demo_slice_bone_scenario,
    demo_trim_clean_scenario,
    demo_trim_drag_scenario,
    hand_trial_scenario,
    knife_trial_scenario,
)
from cobot_cell.scenario import save_scenario

ROOT = Path(__file__).resolve().parents[1] / "scenarios"


def main() -> None:
    ROOT.mkdir(exist_ok=True)
    exp = ROOT / "experiments"
    exp.mkdir(exist_ok=True)
    save_scenario(demo_slice_bone_scenario(), ROOT / "demo_slice_bone.json")
    save_scenario(demo_trim_drag_scenario(), ROOT / "demo_trim_drag.json")
    save_scenario(demo_trim_clean_scenario(), ROOT / "demo_trim_clean.json")
    save_scenario(hand_trial_scenario(seed=0, t_enter_target=1.25),
                  exp / "hand.json")
    save_scenario(knife_trial_scenario(seed=0, with_bone=True, base_lbf=5.0),
                  exp / "knife.json")
    save_scenario(demo_trim_clean_scenario(), exp / "uncertainty.json")
    print(f"wrote scenarios under {ROOT}")


if __name__ == "__main__":
    main()
