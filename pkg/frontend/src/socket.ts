/**
 * Reconnecting websocket wrapper. Every outbound message is validated
 * against the client schema first; an invalid one throws instead of going
 * on the wire. Disconnects retry with capped exponential backoff and the
 * UI shows a banner until the session is back.
 */

import { type ClientMessage, validateClientMessage } from "./protocol.js";

export interface SocketEvents {
  onMessage: (text: string) => void;
  onStatus: (connected: boolean, detail: string) => void;
}

const BACKOFF_START_MS = 1000;
const BACKOFF_CAP_MS = 10_000;

export class CockpitSocket {
  private ws: WebSocket | null = null;
  private backoff = BACKOFF_START_MS;
  private closed = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly url: string,
    private readonly events: SocketEvents,
  ) {}

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.backoff = BACKOFF_START_MS;
      this.events.onStatus(true, "connected");
    };
    ws.onmessage = (ev) => {
      if (typeof ev.data === "string") this.events.onMessage(ev.data);
    };
    ws.onclose = () => {
      this.ws = null;
      if (this.closed) return;
      this.events.onStatus(false, `reconnecting in ${Math.round(this.backoff / 1000)}s`);
      this.timer = setTimeout(() => this.open(), this.backoff);
      this.backoff = Math.min(this.backoff * 2, BACKOFF_CAP_MS);
    };
    ws.onerror = () => {
      // onclose follows and owns the retry
    };
  }

  /** True when a message can be sent right now. */
  get ready(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  send(msg: ClientMessage): void {
    const bad = validateClientMessage(msg);
    if (bad) throw new Error(`refusing to send off-protocol message: ${bad}`);
    if (!this.ready) return; // dropped; the tick loop sends fresh state anyway
    this.ws!.send(JSON.stringify(msg));
  }

  close(): void {
    this.closed = true;
    if (this.timer) clearTimeout(this.timer);
    this.ws?.close();
  }
}
