// WebSocket wrapper: one socket, JSON text frames, auto-reconnect.

import { ClientMessage, ServerMessage, parseServerMessage } from "./protocol";

export interface SocketHandle {
  send: (msg: ClientMessage) => void;
  close: () => void;
}

export function connectConsole(
  url: string,
  onMessage: (msg: ServerMessage) => void,
  onStatus: (up: boolean) => void,
  reconnectMs = 2000
): SocketHandle {
  let ws: WebSocket | null = null;
  let closed = false;

  function open(): void {
    ws = new WebSocket(url);
    ws.onopen = () => onStatus(true);
    ws.onmessage = (event) => {
      const msg = parseServerMessage(String(event.data));
      if (msg !== null) onMessage(msg);
    };
    ws.onclose = () => {
      onStatus(false);
      if (!closed) setTimeout(open, reconnectMs);
    };
    ws.onerror = () => {
      ws?.close();
    };
  }

  open();
  return {
    send: (msg) => {
      if (ws !== null && ws.readyState === WebSocket.OPEN) {
        ws.send(JSON.stringify(msg));
      }
    },
    close: () => {
      closed = true;
      ws?.close();
    },
  };
}
