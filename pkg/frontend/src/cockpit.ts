/**
 * Session state behind the cockpit, kept free of DOM and socket concerns
 * so the whole thing can be driven headless by tests. Server messages go
 * in through onServer(); the render layer reads the fields below and the
 * marker pipeline feeds detections back through addMark().
 */

import type { ConfigureAck, ErrorMessage, Frame, Hello, ResetAck, ServerMessage } from "./protocol.js";

export interface PanelState {
  view: string;
  source: "truth" | "imagined";
  tick: number;
  payload: string; // png-base64, decoded by the render layer
  seq: number; // bumps on every update so renderers know what is stale
}

export interface PathPoint {
  tick: number;
  u: number; // bird's-eye pixel coords at hello.image_size
  v: number;
  yaw: number;
}

export interface MarkPoint {
  tick: number;
  u: number;
  v: number;
}

export interface WhatifFrame {
  k: number;
  view: string;
  payload: string;
}

export function panelKey(view: string, source: "truth" | "imagined"): string {
  return `${view}:${source}`;
}

export class Cockpit {
  hello: Hello | null = null;
  steerView = "";
  imaginedViews: string[] = [];
  tick = 0;
  pose: [number, number, number] | null = null;

  /** Live stream panels, keyed view:source. */
  panels = new Map<string, PanelState>();
  /** True trajectory from truth-frame poses, projected to BEV pixels. */
  truePath: PathPoint[] = [];
  /** Marker detections from imagined bird's-eye frames. */
  marks: MarkPoint[] = [];
  /** Latest what-if preview, replaced wholesale per request. */
  whatifFrames: WhatifFrame[] = [];
  lastError: ErrorMessage | null = null;

  private seq = 0;

  /** Frames updated since the render layer last drained the queue. */
  private renderQueue: PanelState[] = [];

  onServer(msg: ServerMessage): void {
    switch (msg.type) {
      case "hello":
        this.onHello(msg);
        break;
      case "configure":
        this.onConfigure(msg);
        break;
      case "reset":
        this.onReset(msg);
        break;
      case "frame":
        this.onFrame(msg);
        break;
      case "error":
        this.lastError = msg;
        break;
    }
  }

  /** Drain frames that arrived since the last animation frame. */
  drainRenderQueue(): PanelState[] {
    const q = this.renderQueue;
    this.renderQueue = [];
    return q;
  }

  private onHello(h: Hello): void {
    this.hello = h;
    this.steerView = h.steer_view;
    this.imaginedViews = [...h.imagined_views];
    this.tick = h.tick;
    this.panels.clear();
    this.truePath = [];
    this.marks = [];
    this.whatifFrames = [];
    this.lastError = null;
    this.pose = null;
  }

  private onConfigure(ack: ConfigureAck): void {
    this.steerView = ack.steer_view;
    this.imaginedViews = [...ack.imagined_views];
    const wanted = new Set([
      panelKey(ack.steer_view, "truth"),
      ...ack.imagined_views.map((v) => panelKey(v, "imagined")),
    ]);
    for (const key of [...this.panels.keys()]) {
      if (!wanted.has(key)) this.panels.delete(key);
    }
  }

  private onReset(ack: ResetAck): void {
    // new world, new trajectory; the truth frame follows in the same batch
    this.tick = ack.tick;
    this.pose = ack.pose;
    this.truePath = [];
    this.marks = [];
    this.whatifFrames = [];
    this.lastError = null;
  }

  private onFrame(f: Frame): void {
    if (f.source === "whatif") {
      // one strip per request: k restarts at 1 when a new preview begins
      if (f.k !== undefined && f.k <= (this.whatifFrames.at(-1)?.k ?? 0)) {
        this.whatifFrames = [];
      }
      this.whatifFrames.push({ k: f.k ?? 0, view: f.view, payload: f.payload });
      return;
    }
    this.tick = f.tick;
    const state: PanelState = {
      view: f.view,
      source: f.source,
      tick: f.tick,
      payload: f.payload,
      seq: ++this.seq,
    };
    this.panels.set(panelKey(f.view, f.source), state);
    this.renderQueue.push(state);
    if (f.source === "truth" && f.pose && this.hello) {
      this.pose = f.pose;
      const scale = this.hello.image_size / this.hello.world_side;
      this.truePath.push({
        tick: f.tick,
        u: f.pose[0] * scale,
        v: f.pose[1] * scale,
        yaw: f.pose[2],
      });
    }
  }

  /** Record a marker detected in an imagined bird's-eye frame. */
  addMark(tick: number, u: number, v: number): void {
    this.marks.push({ tick, u, v });
  }

  /**
   * Every live panel that claims a given tick must agree on it; the
   * streams for one action are emitted together. Render layers assert
   * this after each batch.
   */
  ticksConsistent(): boolean {
    const ticks = new Set<number>();
    for (const p of this.panels.values()) ticks.add(p.tick);
    // panels may trail by whole batches after a reconfigure, but the two
    // streams of the latest batch always match the session tick
    let latest = -Infinity;
    for (const t of ticks) latest = Math.max(latest, t);
    return this.panels.size === 0 || latest === this.tick;
  }
}
