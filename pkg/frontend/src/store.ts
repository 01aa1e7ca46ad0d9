// Single state store: every server message lands here in arrival order, and
// everything rendered (LED color, state label, plan, alerts) is read from it.
// The console never fabricates state; led/state/zone are verbatim copies of
// the last server message carrying them.

import {
  ClientMessage,
  DecisionMsg,
  EditMsg,
  InspectionClearedMsg,
  LedColor,
  ServerMessage,
} from "./protocol";
import { EditGesture, applyEditLocally, gestureToMessage } from "./gestures";

export interface PlanView {
  planId: string;
  revision: number; // last server-acknowledged revision
  imagePpmB64: string;
  polylines: number[][][]; // displayed; may include optimistic local edits
  ackPolylines: number[][][]; // last server-acknowledged geometry
  selection: number | null;
  dirty: boolean; // local edits not yet acknowledged
}

export interface AssessmentView {
  planId: string;
  dPx: number;
  psi: number;
  alert: boolean;
}

const EDITABLE_STATES = new Set(["awaiting_approval"]);

export class ConsoleStore {
  connected = false;
  plan: PlanView | null = null;
  stateLabel: string | null = null;
  zone: string | null = null;
  led: LedColor | null = null;
  ledHistory: LedColor[] = [];
  assessment: AssessmentView | null = null;
  alertModalVisible = false;
  staleRetryVisible = false;
  removeMode = false;
  lastError: string | null = null;
  private listeners: Array<() => void> = [];

  subscribe(fn: () => void): void {
    this.listeners.push(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn();
  }

  applyServer(msg: ServerMessage): void {
    switch (msg.type) {
      case "plan_proposed":
        this.plan = {
          planId: msg.plan_id,
          revision: msg.revision,
          imagePpmB64: msg.image_ppm_b64,
          polylines: msg.polylines.map((l) => l.map((p) => [...p])),
          ackPolylines: msg.polylines.map((l) => l.map((p) => [...p])),
          selection: null,
          dirty: false,
        };
        this.staleRetryVisible = false; // fresh authoritative plan to act on
        break;
      case "state":
        this.stateLabel = msg.state;
        this.zone = msg.zone;
        this.led = msg.led;
        this.ledHistory.push(msg.led);
        break;
      case "assessment":
        this.assessment = {
          planId: msg.plan_id,
          dPx: msg.d_px,
          psi: msg.psi,
          alert: msg.alert,
        };
        this.alertModalVisible = msg.alert;
        break;
      case "error":
        this.lastError = msg.code;
        if (msg.code === "stale_plan") this.staleRetryVisible = true;
        break;
    }
    this.notify();
  }

  planEditable(): boolean {
    if (this.plan === null) return false;
    return this.stateLabel === null || EDITABLE_STATES.has(this.stateLabel);
  }

  /** Map a pointer gesture to its edit message and apply it optimistically.
   * Returns null (frozen cue) when the plan is not editable. */
  gesture(g: EditGesture): EditMsg | null {
    if (!this.planEditable() || this.plan === null) return null;
    const msg = gestureToMessage(g, {
      plan_id: this.plan.planId,
      revision: this.plan.revision,
      polylines: this.plan.polylines,
    });
    if (msg === null) return null;
    this.plan.polylines = applyEditLocally(this.plan.polylines, msg);
    this.plan.dirty = true;
    this.notify();
    return msg;
  }

  /** Approve carries exactly the revision on display. */
  approveMessage(): DecisionMsg | null {
    if (this.plan === null) return null;
    return {
      type: "decision",
      plan_id: this.plan.planId,
      revision: this.plan.revision,
      action: "approve",
    };
  }

  rejectMessage(): DecisionMsg | null {
    if (this.plan === null) return null;
    return {
      type: "decision",
      plan_id: this.plan.planId,
      revision: this.plan.revision,
      action: "reject",
    };
  }

  clearInspectionMessage(): InspectionClearedMsg {
    this.alertModalVisible = false;
    this.notify();
    return { type: "inspection_cleared" };
  }

  dismissStalePrompt(): void {
    this.staleRetryVisible = false;
    this.notify();
  }

  setConnected(up: boolean): void {
    this.connected = up;
    this.notify();
  }

  toggleRemoveMode(): void {
    this.removeMode = !this.removeMode;
    this.notify();
  }
}

export type OutboundSender = (msg: ClientMessage) => void;
