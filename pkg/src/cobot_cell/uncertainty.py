"""Cut-uncertainty scoring from meat displacement.

The pre/post meat locations are minimum-area bounding boxes of the segmented
meat mask. Displacement is the mean Euclidean distance between the four
canonically ordered corner pairs, so translation and rotation both register.
The score maps displacement through a saturating hyperbolic curve with a
tunable per-pixel sensitivity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import OrientedBox, Point2, min_area_box


@dataclass(frozen=True)
class MeatLocation:
    box: OrientedBox
    t: float = 0.0


@dataclass(frozen=True)
class CutAssessment:
    d: float
    psi: float
    beta: float
    tau: float
    alert: bool

    def __post_init__(self):
        if not (0.0 < self.tau < 1.0):
            raise ValueError("tau must be in (0,1)")
        if self.alert != (self.psi > self.tau):
            raise ValueError("alert inconsistent with psi and tau")


def locate_meat(mask: np.ndarray, t: float = 0.0) -> MeatLocation:
    """Minimum-area box over the mask's pixel centers.

    Only per-row extreme pixels feed the hull; interior pixels cannot be hull
    vertices, and a 640x480 mask reduces to at most 2*height candidates.
    """
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        raise ValueError("no meat detected")
    pts: list[Point2] = []
    for r in np.unique(rows):
        row_cols = cols[rows == r]
        pts.append(Point2(float(row_cols.min()), float(r)))
        pts.append(Point2(float(row_cols.max()), float(r)))
    return MeatLocation(box=min_area_box(pts), t=t)


def displacement(pre: MeatLocation, post: MeatLocation) -> float:
    """Mean Euclidean distance over the 4 canonical corner pairs, in pixels."""
    return (
        sum(a.distance_to(b) for a, b in zip(pre.box.corners, post.box.corners)) / 4.0
    )


def psi(d: float, beta: float) -> float:
    """Displacement-to-uncertainty curve, saturating in [0, 1).

    Evaluated through the hyperbolic tangent so large beta*d cannot overflow;
    float saturation to 1.0 is nudged back below 1 to keep the codomain open.
    """
    if d < 0:
        raise ValueError("d must be >= 0")
    if beta <= 0:
        raise ValueError("beta must be > 0")
    value = math.tanh(beta * d)
    if value >= 1.0:
        value = math.nextafter(1.0, 0.0)
    return value


def evaluate_cut(
    pre: MeatLocation, post: MeatLocation, beta: float, tau: float
) -> CutAssessment:
    """Compose displacement and the uncertainty curve; alert on psi > tau."""
    d = displacement(pre, post)
    score = psi(d, beta)
    return CutAssessment(d=d, psi=score, beta=beta, tau=tau, alert=score > tau)


def fit_beta(pairs: Sequence[tuple[float, float]]) -> float:
    """Fit beta from (displacement, target score) pairs by inverting the curve
    per pair and averaging. Pairs with d == 0 carry no information."""
    betas = []
    for d, target in pairs:
        if not (0.0 < target < 1.0):
            raise ValueError("target psi must be in (0,1)")
        if d <= 0:
            continue
        betas.append(math.atanh(target) / d)
    if not betas:
        raise ValueError("no usable pairs")
    return sum(betas) / len(betas)


def assessment_report(
    plan_id: str, assessment: CutAssessment, pixel_pitch_cm: float
) -> str:
    """Assessment JSON; d is internal pixels, converted to cm for reporting."""
    doc = {
        "plan_id": plan_id,
        "d_px": assessment.d,
        "d_cm": assessment.d * pixel_pitch_cm,
        "psi": assessment.psi,
        "tau": assessment.tau,
        "alert": assessment.alert,
    }
    return json.dumps(doc, sort_keys=True)
