// Wire protocol: one JSON object per WebSocket text message, `type` mandatory.

export type LedColor = "green" | "yellow" | "red";
export type EditOp = "move" | "add" | "remove";

export interface PlanProposedMsg {
  type: "plan_proposed";
  plan_id: string;
  revision: number;
  image_ppm_b64: string;
  polylines: number[][][];
}

export interface StateMsg {
  type: "state";
  state: string;
  zone: string;
  led: LedColor;
  t: number;
}

export interface AssessmentMsg {
  type: "assessment";
  plan_id: string;
  d_px: number;
  psi: number;
  alert: boolean;
}

export interface ErrorMsg {
  type: "error";
  code: string;
}

export type ServerMessage = PlanProposedMsg | StateMsg | AssessmentMsg | ErrorMsg;

export interface EditMsg {
  type: "edit";
  plan_id: string;
  revision: number;
  op: EditOp;
  index: number;
  point?: [number, number];
}

export interface DecisionMsg {
  type: "decision";
  plan_id: string;
  revision: number;
  action: "approve" | "reject";
}

export interface InspectionClearedMsg {
  type: "inspection_cleared";
}

export interface ResetMsg {
  type: "reset";
}

export type ClientMessage = EditMsg | DecisionMsg | InspectionClearedMsg | ResetMsg;

const SERVER_TYPES = new Set(["plan_proposed", "state", "assessment", "error"]);

export function parseServerMessage(raw: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const msg = doc as { type?: unknown };
  if (typeof msg.type !== "string" || !SERVER_TYPES.has(msg.type)) return null;
  return doc as ServerMessage;
}
