import { describe, expect, it } from "vitest";

import {
  applyEditLocally,
  gestureToMessage,
  hitWaypoint,
  nearestInsertIndex,
} from "../src/gestures";

const plan = {
  plan_id: "plan-1",
  revision: 4,
  polylines: [
    [
      [100, 100],
      [200, 100],
      [200, 200],
    ],
    [
      [300, 300],
      [340, 340],
    ],
  ],
};

describe("hitWaypoint", () => {
  it("hits a waypoint exactly under the pointer", () => {
    expect(hitWaypoint(plan.polylines, [200, 100])).toBe(1);
  });

  it("hits within the default 8 px radius", () => {
    expect(hitWaypoint(plan.polylines, [205, 103])).toBe(1);
  });

  it("misses outside the radius", () => {
    expect(hitWaypoint(plan.polylines, [210, 108])).toBeNull();
  });

  it("uses flattened indices across polylines", () => {
    expect(hitWaypoint(plan.polylines, [300, 300])).toBe(3);
  });

  it("picks the nearest of several candidates", () => {
    const tight = [
      [
        [0, 0],
        [6, 0],
      ],
    ];
    expect(hitWaypoint(tight, [4, 0])).toBe(1);
  });
});

describe("nearestInsertIndex", () => {
  it("inserts after the nearest segment", () => {
    expect(nearestInsertIndex(plan.polylines, [150, 95])).toBe(1);
    expect(nearestInsertIndex(plan.polylines, [195, 150])).toBe(2);
  });

  it("never inserts across polylines", () => {
    expect(nearestInsertIndex(plan.polylines, [320, 320])).toBe(4);
  });
});

describe("gestureToMessage", () => {
  it("click exactly on waypoint 2 removes index 2", () => {
    const msg = gestureToMessage(
      { kind: "click-waypoint", point: [200, 200] },
      plan
    );
    expect(msg).toEqual({
      type: "edit",
      plan_id: "plan-1",
      revision: 4,
      op: "remove",
      index: 2,
    });
  });

  it("click midway between waypoints 0 and 1 adds at index 1", () => {
    const msg = gestureToMessage(
      { kind: "click-empty", point: [150, 92] },
      plan
    );
    expect(msg).toEqual({
      type: "edit",
      plan_id: "plan-1",
      revision: 4,
      op: "add",
      index: 1,
      point: [150, 92],
    });
  });

  it("drag of waypoint 0 moves it and carries the revision", () => {
    const msg = gestureToMessage(
      { kind: "drag-waypoint", index: 0, point: [110, 95] },
      plan
    );
    expect(msg).toEqual({
      type: "edit",
      plan_id: "plan-1",
      revision: 4,
      op: "move",
      index: 0,
      point: [110, 95],
    });
  });

  it("click-empty on top of a waypoint yields no message", () => {
    expect(
      gestureToMessage({ kind: "click-empty", point: [200, 100] }, plan)
    ).toBeNull();
  });

  it("click-waypoint in the void yields no message", () => {
    expect(
      gestureToMessage({ kind: "click-waypoint", point: [50, 50] }, plan)
    ).toBeNull();
  });
});

describe("applyEditLocally", () => {
  it("matches the supervisor's flattened-index semantics", () => {
    let lines = plan.polylines;
    lines = applyEditLocally(lines, {
      type: "edit", plan_id: "p", revision: 0, op: "move", index: 0,
      point: [111, 112],
    });
    expect(lines[0][0]).toEqual([111, 112]);
    lines = applyEditLocally(lines, {
      type: "edit", plan_id: "p", revision: 0, op: "add", index: 2,
      point: [1, 2],
    });
    expect(lines[0]).toHaveLength(4);
    expect(lines[0][2]).toEqual([1, 2]);
    lines = applyEditLocally(lines, {
      type: "edit", plan_id: "p", revision: 0, op: "remove", index: 4,
    });
    expect(lines[1]).toHaveLength(1);
    expect(lines[1][0]).toEqual([340, 340]);
  });

  it("boundary insertion goes to the later polyline's start", () => {
    const out = applyEditLocally(plan.polylines, {
      type: "edit", plan_id: "p", revision: 0, op: "add", index: 3,
      point: [9, 9],
    });
    expect(out[0]).toHaveLength(3);
    expect(out[1][0]).toEqual([9, 9]);
  });

  it("append at the very end lands on the last polyline", () => {
    const out = applyEditLocally(plan.polylines, {
      type: "edit", plan_id: "p", revision: 0, op: "add", index: 5,
      point: [8, 8],
    });
    expect(out[1]).toHaveLength(3);
    expect(out[1][2]).toEqual([8, 8]);
  });

  it("does not mutate its input", () => {
    const before = JSON.stringify(plan.polylines);
    applyEditLocally(plan.polylines, {
      type: "edit", plan_id: "p", revision: 0, op: "remove", index: 1,
    });
    expect(JSON.stringify(plan.polylines)).toBe(before);
  });
});
