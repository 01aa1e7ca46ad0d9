"""Simulated collaborative meat-cutting workcell with a safety, transparency,
and feedback supervisor."""

__version__ = "0.1.0"

from .geometry import (
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
from .perception import HandFrame, ZoneConfig, ZoneState, classify_zone
from .knife import (
    ContactEvent,
    ForceSample,
    ForceThreshold,
    calibrate_threshold,
    classify_contact,
)
from .planner import (
    Calibration,
    ColorThresholds,
    CutPlan,
    PlanEdit,
    PlanStatus,
    RobotPath,
    SegmentationMasks,
    apply_edit,
    plan_slices,
    plan_trim,
    segment,
    to_robot_path,
)
from .uncertainty import (
    CutAssessment,
    MeatLocation,
    displacement,
    evaluate_cut,
    locate_meat,
    psi,
)
from .supervisor import (
    EpisodeLog,
    EpisodeRunner,
    LedColor,
    Mode,
    SupervisorState,
    handle_event,
    led_for,
    run,
    velocity_command,
)
from .sim import MeatSpec, Pose, SimConfig, render, scripted_hands, simulate_cut
from .scenario import Scenario, load_scenario, loads_scenario
