"""Experiment harness: desk-scale reproductions of the component evaluations
(hand monitoring, knife contact, displacement uncertainty) plus the demo
scenarios, all emitting machine-readable reports.

Latency here is simulation time, never wall time. Ground-truth hand entry is
solved on the continuous hand model (frame scan bracketing plus bisection) so
measured latencies are not quantized by the sampling grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .geometry import point_in_polygon
from .knife import calibrate_threshold
from .scenario import (
    KnifeSettings,
    OperatorScript,
    Scenario,
    SliceTask,
    TrimTask,
    load_scenario,
    rect,
)
from .sim import (
    DragParams,
    ForceParams,
    HandScriptPoint,
    MeatSpec,
    Pose,
    SimConfig,
    landmarks_at,
    render,
    simulate_cut,
)
from .planner import approve_plan, plan_slices, segment, to_robot_path
from .supervisor import EpisodeRunner, Mode
from .uncertainty import displacement, fit_beta, locate_meat, psi


@dataclass
class TrialReport:
    """Counts and latency statistics in the form the evaluation uses:
    accuracy is the detection rate TP/(TP+FN); precision is TP/(TP+FP) and is
    reported as 1.0 with a flag when no positives were predicted."""

    trials: int
    true_positives: int
    false_positives: int
    false_negatives: int
    latencies: list[float] = field(default_factory=list)
    per_trial: list[dict] = field(default_factory=list)

    @property
    def accuracy(self) -> float:
        denom = self.true_positives + self.false_negatives
        return self.true_positives / denom if denom else 1.0

    @property
    def precision_defined(self) -> bool:
        return (self.true_positives + self.false_positives) > 0

    @property
    def precision(self) -> float:
        denom = self.true_positives + self.false_positives
        return self.true_positives / denom if denom else 1.0

    @property
    def latency_mean_s(self) -> float:
        return float(np.mean(self.latencies)) if self.latencies else 0.0

    @property
    def latency_std_s(self) -> float:
        return float(np.std(self.latencies)) if self.latencies else 0.0

    def to_dict(self, kind: str) -> dict:
        return {
            "kind": kind,
            "trials": self.trials,
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "precision_defined": self.precision_defined,
            "latency_mean_s": self.latency_mean_s,
            "latency_std_s": self.latency_std_s,
            "latencies": self.latencies,
            "per_trial": self.per_trial,
        }


# ------------------------------------------------------------ base scenarios

def loin_spec(with_bone: bool = False,
              bone_body: tuple[float, float, float, float] = (11.0, 3.5, 13.0, 6.5),
              ) -> MeatSpec:
    """Pork-loin analog: 24x10 cm meat slab with a 4 cm fat cap on its right
    edge, placed near the image center. Bone is a small buried block."""
    meat = rect(0.0, 0.0, 24.0, 10.0)
    fat = rect(24.0, 0.0, 28.0, 10.0)
    bone = rect(*bone_body) if with_bone else None
    return MeatSpec(meat=meat, fat=fat, bone=bone, pose=Pose(20.0, 19.0, 0.0))


def base_scenario(seed: int = 0) -> Scenario:
    return Scenario(
        seed=seed,
        cfg=SimConfig(seed=seed),
        spec=loin_spec(),
        task=SliceTask(n=2),
    )


def hand_trial_scenario(seed: int, t_enter_target: float) -> Scenario:
    """One monitored slicing episode where the hand sweeps from outside the
    zones to the middle of the warning zone around t_enter_target."""
    sc = base_scenario(seed)
    zones = sc.zone_config()
    w, h = sc.cfg.image_size
    start = (0.955 * w, 0.10 * h)
    wx0, wy0, wx1, wy1 = zones.warning.bounds()
    target = ((wx0 + wx1) / 2.0, (wy0 + wy1) / 2.0)
    script = (
        HandScriptPoint(t=0.0, centroid=start),
        HandScriptPoint(t=t_enter_target, centroid=target),
        HandScriptPoint(t=t_enter_target + 0.4, centroid=target),
        HandScriptPoint(t=t_enter_target + 1.4, centroid=start),
    )
    return replace(sc, hands=script, operator=OperatorScript(approve_after_s=0.1))


def knife_trial_scenario(seed: int, with_bone: bool, base_lbf: float) -> Scenario:
    sc = base_scenario(seed)
    spec = loin_spec(with_bone=with_bone)
    cfg = replace(sc.cfg, force=ForceParams(bone_ramp_rate=2000.0))
    knife = KnifeSettings(margin=0.25, debounce=2, base_lbf=base_lbf)
    return replace(sc, spec=spec, cfg=cfg, knife=knife,
                   operator=OperatorScript(approve_after_s=0.1))


def demo_slice_bone_scenario(seed: int = 7) -> Scenario:
    """Slicing a loin with a bone buried on the first cut line: the knife
    must e-stop."""
    sc = base_scenario(seed)
    spec = loin_spec(with_bone=True, bone_body=(5.0, 3.5, 7.0, 6.5))
    cfg = replace(sc.cfg, force=ForceParams(bone_ramp_rate=2000.0))
    return replace(sc, spec=spec, cfg=cfg, task=SliceTask(n=4),
                   operator=OperatorScript(approve_after_s=0.1))


def demo_trim_drag_scenario(seed: int = 11) -> Scenario:
    """Trimming along the fat line with a bone straddling it: the ramp is too
    gentle to trip the force threshold, but the blocked travel drags the meat
    enough that the post-cut assessment must raise the inspection alert."""
    sc = base_scenario(seed)
    spec = loin_spec(with_bone=True, bone_body=(23.0, 4.0, 25.0, 6.0))
    cfg = replace(sc.cfg, force=ForceParams(bone_ramp_rate=1.2))
    return replace(sc, spec=spec, cfg=cfg, task=TrimTask(epsilon_px=2.0),
                   operator=OperatorScript(approve_after_s=0.1))


def demo_trim_clean_scenario(seed: int = 13) -> Scenario:
    sc = base_scenario(seed)
    return replace(sc, spec=loin_spec(), task=TrimTask(epsilon_px=2.0),
                   operator=OperatorScript(approve_after_s=0.1))


def _template(scenario_dir: Optional[str], name: str) -> Optional[Scenario]:
    if scenario_dir is None:
        return None
    p = Path(scenario_dir) / f"{name}.json"
    if not p.exists():
        return None
    return load_scenario(p)


# ------------------------------------------------------------ ground truth

def first_warning_entry_time(sc: Scenario) -> float:
    """Exact (bisected) time the continuous hand model first puts a landmark
    inside the warning polygon. The coarse scan runs on the safety grid, so a
    bracket always exists when any sampled frame classifies WARNING."""
    zones = sc.zone_config()
    script = sc.hands
    if not script:
        raise ValueError("missing ground truth")

    def inside(t: float) -> bool:
        return any(
            point_in_polygon(p, zones.warning)
            for p in landmarks_at(script, t, sc.hand_scale)
        )

    hz = sc.cfg.safety_hz
    t_end = script[-1].t
    n = int(math.floor(t_end * hz + 1e-9))
    k_hit = None
    for k in range(n + 1):
        if inside(k / hz):
            k_hit = k
            break
    if k_hit is None:
        raise ValueError("hand never enters the warning zone")
    if k_hit == 0:
        return 0.0
    lo, hi = (k_hit - 1) / hz, k_hit / hz
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ------------------------------------------------------------ experiments

def run_hand_trials(
    trials: int = 50,
    seed: int = 0,
    scenario_dir: Optional[str] = None,
    miss_rate: float = 0.0,
) -> TrialReport:
    """Seeded hand-monitoring trials: one warning-zone entry per episode at a
    uniformly random phase; detections matched within one safety period."""
    template = _template(scenario_dir, "hand")
    rng = np.random.default_rng(seed)
    report = TrialReport(trials=trials, true_positives=0, false_positives=0,
                         false_negatives=0)
    for i in range(trials):
        t_enter = 1.2 + float(rng.uniform(0.0, 3.0 / 60.0))
        if template is not None:
            sc = replace(template, seed=seed + 1000 + i,
                         cfg=replace(template.cfg, seed=seed + 1000 + i))
        else:
            sc = hand_trial_scenario(seed=seed + 1000 + i, t_enter_target=t_enter)
        sc = replace(sc, miss_rate=miss_rate)
        t_true = first_warning_entry_time(sc)
        log = EpisodeRunner(sc).run()
        onsets = [
            e.t for e in log.entries if e.kind == "ev_zonechanged:warning"
        ]
        window = 1.0 / sc.cfg.safety_hz + 1e-9
        matched = [t for t in onsets if 0.0 <= t - t_true <= window]
        extra = [t for t in onsets if t not in matched]
        tp = 1 if matched else 0
        report.true_positives += tp
        report.false_negatives += 0 if matched else 1
        report.false_positives += len(extra)
        latency = None
        if matched:
            stops = [
                e.t
                for e in log.entries
                if e.kind == "vel"
                and e.state == Mode.PAUSED_HUMAN.value
                and e.vx == 0.0 and e.vy == 0.0 and e.vz == 0.0
                and e.t >= t_true
            ]
            if stops:
                latency = stops[0] - t_true
                report.latencies.append(latency)
        report.per_trial.append(
            {
                "trial_id": i,
                "t_entry_true": t_true,
                "onsets": onsets,
                "detected": bool(matched),
                "latency_s": latency,
            }
        )
    return report


def knife_calibration_base(seed: int, traces: int = 5) -> float:
    """Calibrate the normal-cutting force base the way the threshold is meant
    to be set: max force over repeated bone-free cuts."""
    collected = []
    for j in range(traces):
        sc = knife_trial_scenario(seed=seed + 9000 + j, with_bone=False,
                                  base_lbf=10.0)
        pre = render(sc.spec, sc.cfg)
        masks = segment(pre, sc.thresholds)
        plan = plan_slices(masks.meat, sc.task.n, plan_id=f"cal-{j}")
        path = to_robot_path(approve_plan(plan), sc.calibration(), sc.speed_cmps)
        rng = np.random.default_rng(sc.seed)
        _, forces, _ = simulate_cut(sc.spec, path, sc.cfg, rng)
        samples = [f for f in forces if f.force > 0.0]
        if samples:
            collected.append(samples)
    th = calibrate_threshold(collected, margin=0.0, debounce=1)
    return th.base


def run_knife_trials(
    trials: int = 20,
    seed: int = 0,
    scenario_dir: Optional[str] = None,
) -> tuple[TrialReport, list[dict]]:
    """Seeded bone-contact trials plus bone-free controls.

    Returns the report and the contact CSV rows
    (trial_id, t_contact, t_detect, latency_s).
    """
    template = _template(scenario_dir, "knife")
    if template is not None and template.spec.bone is None:
        raise ValueError("knife template must place a bone on the planned path")
    base = knife_calibration_base(seed)
    report = TrialReport(trials=trials, true_positives=0, false_positives=0,
                         false_negatives=0)
    csv_rows: list[dict] = []
    for i in range(trials):
        if template is not None:
            sc = replace(template, seed=seed + 2000 + i,
                         cfg=replace(template.cfg, seed=seed + 2000 + i),
                         knife=replace(template.knife, base_lbf=base))
        else:
            sc = knife_trial_scenario(seed=seed + 2000 + i, with_bone=True,
                                      base_lbf=base)
        runner = EpisodeRunner(sc)
        log = runner.run()
        detected = log.final_state() == Mode.ESTOPPED_CONTACT.value
        t_contact = runner.t_first_bone
        t_detect = (
            runner.classifier.fired.t_detect
            if runner.classifier is not None and runner.classifier.fired
            else None
        )
        latency = None
        if detected and t_contact is not None:
            stops = [
                e.t
                for e in log.entries
                if e.kind == "vel"
                and e.state == Mode.ESTOPPED_CONTACT.value
                and e.vx == 0.0 and e.vy == 0.0 and e.vz == 0.0
            ]
            if stops:
                latency = stops[0] - t_contact
                report.latencies.append(latency)
        report.true_positives += 1 if detected else 0
        report.false_negatives += 0 if detected else 1
        report.per_trial.append(
            {
                "trial_id": i,
                "bone": True,
                "detected": detected,
                "t_contact": t_contact,
                "t_detect": t_detect,
                "latency_s": latency,
            }
        )
        if detected:
            csv_rows.append(
                {
                    "trial_id": i,
                    "t_contact": t_contact,
                    "t_detect": t_detect,
                    "latency_s": latency,
                }
            )
    # bone-free controls: any contact here is a false positive
    for i in range(trials):
        if template is not None:
            sc = replace(template, seed=seed + 3000 + i,
                         cfg=replace(template.cfg, seed=seed + 3000 + i),
                         spec=replace(template.spec, bone=None),
                         knife=replace(template.knife, base_lbf=base))
        else:
            sc = knife_trial_scenario(seed=seed + 3000 + i, with_bone=False,
                                      base_lbf=base)
        log = EpisodeRunner(sc).run()
        fired = log.final_state() == Mode.ESTOPPED_CONTACT.value
        report.false_positives += 1 if fired else 0
        report.per_trial.append(
            {"trial_id": trials + i, "bone": False, "detected": fired}
        )
    return report, csv_rows


def knife_latency_closed_form(sc: Scenario) -> tuple[float, float]:
    """Expected contact-to-stop latency bounds: (debounce-1) control periods
    for the debounce run, the link latency, plus at most one control tick of
    command phase."""
    tick = 1.0 / sc.cfg.control_hz
    lo = (sc.knife.debounce - 1) * tick + sc.knife.link_latency_s
    return lo, lo + tick


DEFAULT_UNCERTAINTY_CASES = (
    {"translation_cm": 0.0},
    {"translation_cm": 1.1},
    {"translation_cm": 1.5},
    {"translation_cm": 2.9},
    {"translation_cm": 4.5},
    {"rotation_deg": 0.0},
    {"rotation_deg": 7.0},
    {"rotation_deg": 10.0},
    {"rotation_deg": 39.0},
    {"rotation_deg": 45.0},
)


def run_uncertainty_table(
    cases: Sequence[dict] = DEFAULT_UNCERTAINTY_CASES,
    beta: float = 0.05,
    scenario_dir: Optional[str] = None,
) -> dict:
    """Exact-transform displacement sweep through the full vision pipeline:
    pose the specimen, re-render, re-segment, locate, and score."""
    template = _template(scenario_dir, "uncertainty") or base_scenario(seed=0)
    sc = template
    pre = render(sc.spec, sc.cfg)
    pre_masks = segment(pre, sc.thresholds)
    pre_loc = locate_meat(pre_masks.meat)
    rows = []
    for case in cases:
        if "translation_cm" in case:
            mag = float(case["translation_cm"])
            moved = sc.spec.transformed(dx=mag)
            kind = "translation_cm"
        elif "rotation_deg" in case:
            mag = float(case["rotation_deg"])
            moved = sc.spec.transformed(dtheta_deg=mag)
            kind = "rotation_deg"
        else:
            raise ValueError(f"bad case {case!r}")
        post = render(moved, sc.cfg)
        post_masks = segment(post, sc.thresholds)
        post_loc = locate_meat(post_masks.meat)
        d = displacement(pre_loc, post_loc)
        rows.append(
            {"kind": kind, "magnitude": mag, "d_px": d, "psi": psi(d, beta)
             if d > 0 else 0.0}
        )
    families = {}
    for kind in ("translation_cm", "rotation_deg"):
        fam = [r for r in rows if r["kind"] == kind]
        fam_sorted = sorted(fam, key=lambda r: r["magnitude"])
        families[kind] = {
            "strictly_increasing_psi": all(
                a["psi"] < b["psi"] for a, b in zip(fam_sorted, fam_sorted[1:])
            )
            if len(fam_sorted) > 1
            else True
        }
    return {"beta": beta, "rows": rows, "families": families}


def calibrate_beta_from_pairs(pairs: Sequence[dict]) -> dict:
    tuples = [(float(p["d"]), float(p["psi"])) for p in pairs]
    beta = fit_beta(tuples)
    return {"beta": beta, "pairs": len(tuples)}


def fuzz_scenario(seed: int) -> Scenario:
    """Randomized small-frame episode for supervisor property fuzzing.

    Geometry is kept far enough from the frame edges that the worst-case drag
    cannot push the specimen out of view mid-assessment.
    """
    rng = np.random.default_rng(seed)
    cfg = SimConfig(
        pixel_pitch=0.25,
        image_size=(160, 120),
        seed=seed,
        drag=DragParams(
            translation_gain=float(rng.uniform(0.5, 1.5)),
            rotation_gain=float(rng.uniform(0.0, 4.0)),
            slip_noise=float(rng.uniform(0.0, 0.25)),
        ),
        force=ForceParams(
            bone_ramp_rate=float(rng.choice([1.0, 300.0, 2000.0]))
        ),
    )
    mw = float(rng.uniform(8.0, 14.0))
    mh = float(rng.uniform(5.0, 8.0))
    meat = rect(0.0, 0.0, mw, mh)
    fat = rect(mw, 0.0, mw + 3.0, mh)
    bone = None
    if rng.random() < 0.5:
        bw = float(rng.uniform(0.5, 2.0))
        placement = rng.random()
        if placement < 0.4:
            bx = mw / 2.0 - bw / 2.0  # on the n=2 slice line
        elif placement < 0.6:
            bx = mw - 1.0 - bw / 2.0  # near the trim interface
        else:
            bx = float(rng.uniform(1.0, mw - 2.0 - bw))
        by = float(rng.uniform(0.5, mh - 2.0))
        bone = rect(bx, by, bx + bw, by + float(rng.uniform(0.5, 1.5)))
    pose = Pose(
        x=float(rng.uniform(10.0, 14.0)), y=float(rng.uniform(9.0, 12.0))
    )
    spec = MeatSpec(meat=meat, fat=fat, bone=bone, pose=pose)
    task = SliceTask(n=int(rng.integers(2, 4))) if rng.random() < 0.6 else TrimTask()
    hands: tuple[HandScriptPoint, ...] = ()
    if rng.random() < 0.6:
        t_in = float(rng.uniform(0.3, 1.2))
        dwell = float(rng.uniform(0.1, 0.5))
        start = (195.0, 60.0)  # template fully off-frame: reads as no hand
        target = (80.0, 60.0)
        hands = (
            HandScriptPoint(0.0, start),
            HandScriptPoint(t_in, target),
            HandScriptPoint(t_in + dwell, target),
            HandScriptPoint(t_in + dwell + 0.8, start),
        )
    edits: tuple[dict, ...] = ()
    if rng.random() < 0.4:
        edits = (
            {"after_s": 0.05, "op": "move", "index": 0,
             "point": [float(rng.uniform(20.5, 139.3)),
                       float(rng.uniform(20.7, 99.4))]},
        )
    operator = OperatorScript(
        approve_after_s=float(rng.uniform(0.05, 0.4)),
        edits=edits,
        clear_inspection_after_s=(
            float(rng.uniform(0.05, 0.3)) if rng.random() < 0.5 else None
        ),
    )
    return Scenario(
        seed=seed,
        cfg=cfg,
        spec=spec,
        task=task,
        hands=hands,
        speed_cmps=10.0,
        operator=operator,
        t_max_s=8.0,
        hand_scale=0.5,
    )


def report_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2)


def knife_csv(rows: Sequence[dict]) -> str:
    lines = ["trial_id,t_contact,t_detect,latency_s"]
    for r in rows:
        lines.append(
            f"{r['trial_id']},{r['t_contact']},{r['t_detect']},{r['latency_s']}"
        )
    return "\n".join(lines) + "\n"
