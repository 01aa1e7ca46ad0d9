// Conformance against a recorded supervisor session: the fixture was
// produced by the real wire session, and its per-step polylines came through
// the supervisor's own edit application, so the displayed geometry at the
// end must match it exactly.

import { describe, expect, it } from "vitest";

import { EditGesture } from "../src/gestures";
import { ClientMessage, LedColor, ServerMessage } from "../src/protocol";
import { ConsoleStore } from "../src/store";
import fixture from "./fixtures/session.json";

interface ScriptEntry {
  dir: "server" | "client" | "gesture";
  msg?: Record<string, unknown>;
  gesture?: Record<string, unknown>;
  expect?: Record<string, unknown>;
}

const script = fixture.script as ScriptEntry[];
const expected = fixture.expected as {
  final_polylines: number[][][];
  final_revision: number;
  led_sequence: LedColor[];
  assessment: { d_px: number; psi: number; alert: boolean };
};

function runScript(store: ConsoleStore): ClientMessage[] {
  const sent: ClientMessage[] = [];
  for (const entry of script) {
    if (entry.dir === "server") {
      const msg = entry.msg as unknown as ServerMessage;
      store.applyServer(msg);
      if (msg.type === "state") {
        // rendered LED and state label are verbatim copies of the message
        expect(store.led).toBe(msg.led);
        expect(store.stateLabel).toBe(msg.state);
        expect(store.zone).toBe(msg.zone);
      }
    } else if (entry.dir === "gesture") {
      const produced = store.gesture(entry.gesture as unknown as EditGesture);
      expect(produced).not.toBeNull();
      expect(produced).toEqual(entry.expect);
      sent.push(produced!);
    } else {
      // scripted client traffic (decisions, inspection cleared)
      sent.push(entry.msg as unknown as ClientMessage);
    }
  }
  return sent;
}

describe("console conformance with a recorded session", () => {
  it("replays the session: edits, approval, alert, clear", () => {
    const store = new ConsoleStore();
    runScript(store);
    expect(store.plan).not.toBeNull();
    expect(store.plan!.revision).toBe(expected.final_revision);
    expect(store.plan!.polylines).toEqual(expected.final_polylines);
    expect(store.plan!.dirty).toBe(false); // server acknowledged every edit
  });

  it("every rendered LED color appeared verbatim in a server message", () => {
    const store = new ConsoleStore();
    runScript(store);
    expect(store.ledHistory).toEqual(expected.led_sequence);
  });

  it("raises the alert modal and clears it via the protocol message", () => {
    const store = new ConsoleStore();
    let modalSeen = false;
    for (const entry of script) {
      if (entry.dir === "server") {
        store.applyServer(entry.msg as unknown as ServerMessage);
        if (store.alertModalVisible) modalSeen = true;
      } else if (entry.dir === "gesture") {
        store.gesture(entry.gesture as unknown as EditGesture);
      } else if ((entry.msg as { type?: string }).type === "inspection_cleared") {
        expect(store.alertModalVisible).toBe(true);
        const out = store.clearInspectionMessage();
        expect(out).toEqual({ type: "inspection_cleared" });
        expect(store.alertModalVisible).toBe(false);
      }
    }
    expect(modalSeen).toBe(true);
    expect(store.assessment!.psi).toBeCloseTo(expected.assessment.psi, 12);
    expect(store.assessment!.alert).toBe(true);
  });

  it("stale approve surfaces the retry prompt until a fresh plan arrives", () => {
    const store = new ConsoleStore();
    let sawPrompt = false;
    for (const entry of script) {
      if (entry.dir === "server") {
        const msg = entry.msg as unknown as ServerMessage;
        store.applyServer(msg);
        if (msg.type === "error" && msg.code === "stale_plan") {
          expect(store.staleRetryVisible).toBe(true);
          sawPrompt = true;
        }
        if (sawPrompt && msg.type === "plan_proposed") {
          expect(store.staleRetryVisible).toBe(false);
        }
      } else if (entry.dir === "gesture") {
        store.gesture(entry.gesture as unknown as EditGesture);
      }
    }
    expect(sawPrompt).toBe(true);
  });

  it("approve always carries the revision being displayed", () => {
    const store = new ConsoleStore();
    for (const entry of script) {
      if (entry.dir === "server") {
        store.applyServer(entry.msg as unknown as ServerMessage);
      } else if (entry.dir === "gesture") {
        store.gesture(entry.gesture as unknown as EditGesture);
      } else {
        const msg = entry.msg as { type?: string; action?: string;
                                   revision?: number };
        if (msg.type === "decision" && msg.action === "approve"
            && msg.revision === expected.final_revision) {
          // the console would produce exactly this approval
          expect(store.approveMessage()).toEqual(entry.msg);
        }
      }
    }
  });

  it("optimistic edits mark the plan dirty until acknowledged", () => {
    const store = new ConsoleStore();
    for (const entry of script) {
      if (entry.dir === "server") {
        store.applyServer(entry.msg as unknown as ServerMessage);
        if ((entry.msg as { type?: string }).type === "plan_proposed") {
          expect(store.plan!.dirty).toBe(false);
        }
      } else if (entry.dir === "gesture") {
        store.gesture(entry.gesture as unknown as EditGesture);
        expect(store.plan!.dirty).toBe(true);
      }
    }
  });

  it("ignores gestures once the plan is frozen", () => {
    const store = new ConsoleStore();
    for (const entry of script) {
      if (entry.dir === "server") {
        store.applyServer(entry.msg as unknown as ServerMessage);
      } else if (entry.dir === "gesture") {
        store.gesture(entry.gesture as unknown as EditGesture);
      }
    }
    // session ended idle with an already-executed plan: no more edits
    expect(store.planEditable()).toBe(false);
    const g: EditGesture = {
      kind: "drag-waypoint",
      index: 0,
      point: [10, 10],
    };
    expect(store.gesture(g)).toBeNull();
  });
});
