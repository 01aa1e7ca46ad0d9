// Click-and-drag editing: map pointer gestures onto protocol edit messages.
//
// Waypoint indices are flattened across the plan's polylines, matching the
// supervisor's edit semantics; an insertion lands after the nearest segment.

import { EditMsg } from "./protocol";

export const DEFAULT_HIT_RADIUS = 8;

export type GestureKind = "click-empty" | "click-waypoint" | "drag-waypoint";

export interface EditGesture {
  kind: GestureKind;
  point: [number, number];
  index?: number; // drag gestures carry the waypoint grabbed at drag start
}

export interface EditablePlan {
  plan_id: string;
  revision: number;
  polylines: number[][][];
}

function dist(ax: number, ay: number, bx: number, by: number): number {
  return Math.hypot(ax - bx, ay - by);
}

export function flatCount(polylines: number[][][]): number {
  return polylines.reduce((n, line) => n + line.length, 0);
}

/** Flattened index of the waypoint within hit radius of p, or null. */
export function hitWaypoint(
  polylines: number[][][],
  p: [number, number],
  radius: number = DEFAULT_HIT_RADIUS
): number | null {
  let best: number | null = null;
  let bestD = radius;
  let flat = 0;
  for (const line of polylines) {
    for (const [x, y] of line) {
      const d = dist(x, y, p[0], p[1]);
      if (d <= bestD) {
        bestD = d;
        best = flat;
      }
      flat++;
    }
  }
  return best;
}

function segmentDistance(
  p: [number, number],
  a: number[],
  b: number[]
): number {
  const dx = b[0] - a[0];
  const dy = b[1] - a[1];
  const den = dx * dx + dy * dy;
  if (den === 0) return dist(p[0], p[1], a[0], a[1]);
  let t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / den;
  t = Math.max(0, Math.min(1, t));
  return dist(p[0], p[1], a[0] + t * dx, a[1] + t * dy);
}

/** Flattened insertion index after the segment nearest to p. */
export function nearestInsertIndex(
  polylines: number[][][],
  p: [number, number]
): number {
  let bestIdx = flatCount(polylines);
  let bestD = Infinity;
  let offset = 0;
  for (const line of polylines) {
    for (let i = 0; i + 1 < line.length; i++) {
      const d = segmentDistance(p, line[i], line[i + 1]);
      if (d < bestD) {
        bestD = d;
        bestIdx = offset + i + 1;
      }
    }
    offset += line.length;
  }
  return bestIdx;
}

/**
 * One gesture maps to exactly one protocol edit message (or null when the
 * gesture hits nothing actionable). The caller guarantees the plan is
 * editable; the message carries the revision currently displayed.
 */
export function gestureToMessage(
  g: EditGesture,
  plan: EditablePlan,
  hitRadius: number = DEFAULT_HIT_RADIUS
): EditMsg | null {
  if (g.kind === "drag-waypoint") {
    const index = g.index ?? hitWaypoint(plan.polylines, g.point, hitRadius);
    if (index === null || index === undefined) return null;
    return {
      type: "edit",
      plan_id: plan.plan_id,
      revision: plan.revision,
      op: "move",
      index,
      point: [g.point[0], g.point[1]],
    };
  }
  if (g.kind === "click-waypoint") {
    const index = hitWaypoint(plan.polylines, g.point, hitRadius);
    if (index === null) return null;
    return {
      type: "edit",
      plan_id: plan.plan_id,
      revision: plan.revision,
      op: "remove",
      index,
    };
  }
  // click-empty: adding on top of an existing waypoint is not an add
  if (hitWaypoint(plan.polylines, g.point, hitRadius) !== null) return null;
  return {
    type: "edit",
    plan_id: plan.plan_id,
    revision: plan.revision,
    op: "add",
    index: nearestInsertIndex(plan.polylines, g.point),
    point: [g.point[0], g.point[1]],
  };
}

/** Mirror of the supervisor's flattened-index edit application, used for
 * optimistic local rendering until the server's reconciliation arrives. */
export function applyEditLocally(
  polylines: number[][][],
  msg: EditMsg
): number[][][] {
  const out = polylines.map((line) => line.map((p) => [...p]));
  let offset = 0;
  for (let li = 0; li < out.length; li++) {
    const len = out[li].length;
    const isLast = li === out.length - 1;
    const inLine =
      msg.op === "add"
        ? msg.index >= offset && (msg.index < offset + len || isLast)
        : msg.index >= offset && msg.index < offset + len;
    if (inLine) {
      const local = Math.min(msg.index - offset, len);
      if (msg.op === "move" && msg.point) out[li][local] = [...msg.point];
      else if (msg.op === "add" && msg.point) out[li].splice(local, 0, [...msg.point]);
      else if (msg.op === "remove") out[li].splice(local, 1);
      return out;
    }
    offset += len;
  }
  return out;
}
