import { DEFAULT_HIT_RADIUS, hitWaypoint } from "./gestures";
import { ConsoleStore } from "./store";
import { ConsoleView, ViewElements } from "./view";
import { connectConsole } from "./ws";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) throw new Error(`missing #${id}`);
  return node as T;
}

const store = new ConsoleStore();
const els: ViewElements = {
  canvas: el<HTMLCanvasElement>("plan-canvas"),
  led: el("led"),
  banner: el("banner"),
  modal: el("alert-modal"),
  modalBody: el("alert-body"),
  stalePrompt: el("stale-prompt"),
  approveBtn: el<HTMLButtonElement>("approve"),
  rejectBtn: el<HTMLButtonElement>("reject"),
  removeToggle: el<HTMLButtonElement>("remove-toggle"),
  connBadge: el("conn"),
};
const view = new ConsoleView(els, store);
store.subscribe(() => view.render());

const wsUrl =
  new URLSearchParams(location.search).get("ws") ??
  `ws://${location.hostname}:8750/ws`;
const socket = connectConsole(
  wsUrl,
  (msg) => store.applyServer(msg),
  (up) => store.setConnected(up)
);

function canvasPoint(ev: MouseEvent): [number, number] {
  const rect = els.canvas.getBoundingClientRect();
  return [ev.clientX - rect.left, ev.clientY - rect.top];
}

let dragIndex: number | null = null;
let dragMoved = false;

els.canvas.addEventListener("mousedown", (ev) => {
  if (!store.planEditable() || store.plan === null) return;
  const p = canvasPoint(ev);
  const hit = hitWaypoint(store.plan.polylines, p, DEFAULT_HIT_RADIUS);
  if (hit !== null && !store.removeMode) {
    dragIndex = hit;
    dragMoved = false;
  }
});

els.canvas.addEventListener("mousemove", (ev) => {
  if (dragIndex === null) return;
  dragMoved = true;
  view.dragPreview = { index: dragIndex, point: canvasPoint(ev) };
  view.render();
});

els.canvas.addEventListener("mouseup", (ev) => {
  const p = canvasPoint(ev);
  if (dragIndex !== null && dragMoved) {
    const msg = store.gesture({
      kind: "drag-waypoint",
      point: p,
      index: dragIndex,
    });
    if (msg !== null) socket.send(msg);
  }
  dragIndex = null;
  dragMoved = false;
  view.dragPreview = null;
  view.render();
});

els.canvas.addEventListener("click", (ev) => {
  if (dragMoved) return; // drag already handled on mouseup
  if (store.plan === null) return;
  const p = canvasPoint(ev);
  const hit = hitWaypoint(store.plan.polylines, p, DEFAULT_HIT_RADIUS);
  const kind = hit !== null ? "click-waypoint" : "click-empty";
  if (kind === "click-waypoint" && !store.removeMode) return; // drag handles it
  const msg = store.gesture({ kind, point: p });
  if (msg !== null) socket.send(msg);
});

els.approveBtn.addEventListener("click", () => {
  const msg = store.approveMessage();
  if (msg !== null) socket.send(msg);
});

els.rejectBtn.addEventListener("click", () => {
  const msg = store.rejectMessage();
  if (msg !== null) socket.send(msg);
});

els.removeToggle.addEventListener("click", () => store.toggleRemoveMode());

el<HTMLButtonElement>("clear-inspection").addEventListener("click", () => {
  socket.send(store.clearInspectionMessage());
});

el<HTMLButtonElement>("stale-dismiss").addEventListener("click", () =>
  store.dismissStalePrompt()
);
el<HTMLButtonElement>("stale-retry").addEventListener("click", () => {
  store.dismissStalePrompt();
  const msg = store.approveMessage();
  if (msg !== null) socket.send(msg);
});

el<HTMLButtonElement>("reset").addEventListener("click", () =>
  socket.send({ type: "reset" })
);

view.render();
