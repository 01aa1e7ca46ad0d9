// DOM rendering: camera raster with the plan overlay, LED swatch, state
// banner, alert modal, and the stale-plan retry prompt.

import { DecodedImage, decodePlanImage } from "./ppm";
import { ConsoleStore } from "./store";

const WAYPOINT_RADIUS = 5;
const LED_COLORS: Record<string, string> = {
  green: "#2e9e4f",
  yellow: "#d8b80c",
  red: "#cc2a2a",
};

export interface ViewElements {
  canvas: HTMLCanvasElement;
  led: HTMLElement;
  banner: HTMLElement;
  modal: HTMLElement;
  modalBody: HTMLElement;
  stalePrompt: HTMLElement;
  approveBtn: HTMLButtonElement;
  rejectBtn: HTMLButtonElement;
  removeToggle: HTMLButtonElement;
  connBadge: HTMLElement;
}

export class ConsoleView {
  private imageCache: { revisionKey: string; img: DecodedImage } | null = null;
  dragPreview: { index: number; point: [number, number] } | null = null;

  constructor(private els: ViewElements, private store: ConsoleStore) {}

  render(): void {
    const s = this.store;
    this.els.connBadge.textContent = s.connected ? "connected" : "disconnected";
    this.els.connBadge.className = s.connected ? "conn up" : "conn down";
    document.body.classList.toggle("offline", !s.connected);

    this.els.led.style.background = s.led ? LED_COLORS[s.led] : "#555";
    this.els.led.title = s.led ?? "no signal";
    this.els.banner.textContent = s.stateLabel
      ? `state: ${s.stateLabel}   zone: ${s.zone ?? "?"}`
      : "waiting for supervisor";

    const editable = s.planEditable();
    this.els.approveBtn.disabled = !editable || !s.connected;
    this.els.rejectBtn.disabled = !editable || !s.connected;
    this.els.removeToggle.textContent = s.removeMode
      ? "remove mode: on"
      : "remove mode: off";

    this.renderCanvas(editable);
    this.renderModal();
    this.els.stalePrompt.style.display = s.staleRetryVisible ? "block" : "none";
  }

  private planImage(): DecodedImage | null {
    const plan = this.store.plan;
    if (plan === null) return null;
    const key = `${plan.planId}@${plan.revision}`;
    if (this.imageCache === null || this.imageCache.revisionKey !== key) {
      this.imageCache = { revisionKey: key, img: decodePlanImage(plan.imagePpmB64) };
    }
    return this.imageCache.img;
  }

  private renderCanvas(editable: boolean): void {
    const plan = this.store.plan;
    const ctx = this.els.canvas.getContext("2d");
    if (ctx === null) return;
    if (plan === null) {
      ctx.clearRect(0, 0, this.els.canvas.width, this.els.canvas.height);
      return;
    }
    const img = this.planImage();
    if (img !== null) {
      this.els.canvas.width = img.width;
      this.els.canvas.height = img.height;
      const rgba = img.rgba as Uint8ClampedArray<ArrayBuffer>;
      ctx.putImageData(new ImageData(rgba, img.width, img.height), 0, 0);
    }
    const lines = plan.polylines.map((line) => line.map((p) => [...p]));
    if (this.dragPreview !== null) {
      let flat = 0;
      for (const line of lines) {
        for (let i = 0; i < line.length; i++, flat++) {
          if (flat === this.dragPreview.index) line[i] = [...this.dragPreview.point];
        }
      }
    }
    ctx.lineWidth = 2;
    ctx.strokeStyle = plan.dirty ? "#3fa7ff" : "#ffffff";
    for (const line of lines) {
      ctx.beginPath();
      line.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
      ctx.stroke();
    }
    ctx.fillStyle = editable ? "#ffd23f" : "#9a9a9a";
    for (const line of lines) {
      for (const [x, y] of line) {
        ctx.beginPath();
        ctx.arc(x, y, WAYPOINT_RADIUS, 0, Math.PI * 2);
        ctx.fill();
      }
    }
  }

  private renderModal(): void {
    const s = this.store;
    this.els.modal.style.display = s.alertModalVisible ? "flex" : "none";
    if (s.assessment !== null && s.alertModalVisible) {
      this.els.modalBody.textContent =
        `Cut uncertainty alert for ${s.assessment.planId}: ` +
        `displacement ${s.assessment.dPx.toFixed(1)} px, ` +
        `score ${s.assessment.psi.toFixed(3)}. Inspect the cut before resuming.`;
    }
  }
}
