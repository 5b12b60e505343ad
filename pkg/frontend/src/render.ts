/**
 * Canvas rendering for the cockpit. Frames queue up as socket messages
 * land and are consumed once per animation frame; decoding goes through
 * an offscreen canvas so imagined bird's-eye frames can be read back for
 * marker detection before being blitted to the visible panel.
 */

import { Cockpit, type PanelState, panelKey } from "./cockpit.js";
import { detectMarker } from "./marker.js";
import { pathColor, tickFrac } from "./trajectory.js";

const PANEL_SCALE = 4; // 64 px frames show at 256 css px
const TRAJ_SCALE = 5;

function decodePng(payload: string): Promise<HTMLImageElement> {
  return new Promise((resolve, reject) => {
    const img = new Image();
    img.onload = () => resolve(img);
    img.onerror = () => reject(new Error("bad png payload"));
    img.src = `data:image/png;base64,${payload}`;
  });
}

interface PanelDom {
  root: HTMLElement;
  canvas: HTMLCanvasElement;
  label: HTMLElement;
  tickEl: HTMLElement;
}

export class Renderer {
  private panelDom = new Map<string, PanelDom>();
  private scratch = document.createElement("canvas");
  private trajCanvas: HTMLCanvasElement;
  private whatifStrip: HTMLElement;

  constructor(
    private readonly cockpit: Cockpit,
    private readonly panelHost: HTMLElement,
    trajCanvas: HTMLCanvasElement,
    whatifStrip: HTMLElement,
  ) {
    this.trajCanvas = trajCanvas;
    this.whatifStrip = whatifStrip;
  }

  /** Create or prune panel DOM to match the configured streams. */
  syncPanels(): void {
    const c = this.cockpit;
    const wanted: Array<{ key: string; view: string; source: "truth" | "imagined" }> = [];
    if (c.steerView) wanted.push({ key: panelKey(c.steerView, "truth"), view: c.steerView, source: "truth" });
    for (const v of c.imaginedViews) {
      wanted.push({ key: panelKey(v, "imagined"), view: v, source: "imagined" });
    }
    const keep = new Set(wanted.map((w) => w.key));
    for (const [key, dom] of this.panelDom) {
      if (!keep.has(key)) {
        dom.root.remove();
        this.panelDom.delete(key);
      }
    }
    const size = c.hello?.image_size ?? 64;
    for (const w of wanted) {
      if (this.panelDom.has(w.key)) continue;
      const root = document.createElement("div");
      root.className = `panel ${w.source}`;
      const label = document.createElement("div");
      label.className = "panel-label";
      label.textContent = `${w.view.toUpperCase()} · ${w.source === "truth" ? "ground truth" : "imagined"}`;
      const tickEl = document.createElement("div");
      tickEl.className = "panel-tick";
      tickEl.textContent = "tick –";
      const canvas = document.createElement("canvas");
      canvas.width = size;
      canvas.height = size;
      canvas.style.width = `${size * PANEL_SCALE}px`;
      canvas.style.height = `${size * PANEL_SCALE}px`;
      const head = document.createElement("div");
      head.className = "panel-head";
      head.append(label, tickEl);
      root.append(head, canvas);
      this.panelHost.append(root);
      this.panelDom.set(w.key, { root, canvas, label, tickEl });
    }
  }

  /** Draw everything that changed since the last animation frame. */
  async flush(): Promise<void> {
    const batch = this.cockpit.drainRenderQueue();
    for (const frame of batch) {
      await this.drawPanel(frame);
    }
    if (batch.length > 0) this.drawTrajectory();
    await this.drawWhatif();
  }

  private async drawPanel(frame: PanelState): Promise<void> {
    const dom = this.panelDom.get(panelKey(frame.view, frame.source));
    if (!dom) return;
    let img: HTMLImageElement;
    try {
      img = await decodePng(frame.payload);
    } catch {
      dom.tickEl.textContent = `tick ${frame.tick} (undecodable)`;
      return;
    }
    const ctx = dom.canvas.getContext("2d")!;
    ctx.imageSmoothingEnabled = false;
    ctx.drawImage(img, 0, 0);
    dom.tickEl.textContent = `tick ${frame.tick}`;

    // imagined bird's-eye frames feed the trajectory overlay
    if (frame.source === "imagined" && frame.view === "bev") {
      this.scratch.width = img.width;
      this.scratch.height = img.height;
      const sctx = this.scratch.getContext("2d", { willReadFrequently: true })!;
      sctx.drawImage(img, 0, 0);
      const pixels = sctx.getImageData(0, 0, img.width, img.height);
      const hit = detectMarker(pixels.data, img.width, img.height);
      if (hit.found) this.cockpit.addMark(frame.tick, hit.u, hit.v);
    }
  }

  drawTrajectory(): void {
    const c = this.cockpit;
    const size = c.hello?.image_size ?? 64;
    const px = size * TRAJ_SCALE;
    if (this.trajCanvas.width !== px) {
      this.trajCanvas.width = px;
      this.trajCanvas.height = px;
    }
    const ctx = this.trajCanvas.getContext("2d")!;
    ctx.fillStyle = "#11131a";
    ctx.fillRect(0, 0, px, px);
    ctx.strokeStyle = "#39405a";
    ctx.strokeRect(0.5, 0.5, px - 1, px - 1);

    const path = c.truePath;
    if (path.length === 0) return;
    const first = path[0]!.tick;
    const last = path[path.length - 1]!.tick;

    // true path: thin gradient line
    for (let i = 1; i < path.length; i++) {
      const a = path[i - 1]!;
      const b = path[i]!;
      ctx.strokeStyle = pathColor(tickFrac(b.tick, first, last));
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.moveTo(a.u * TRAJ_SCALE, a.v * TRAJ_SCALE);
      ctx.lineTo(b.u * TRAJ_SCALE, b.v * TRAJ_SCALE);
      ctx.stroke();
    }

    // detected imagined-marker positions: crosses in the same gradient
    for (const m of c.marks) {
      const t = tickFrac(m.tick, first, last);
      ctx.strokeStyle = pathColor(t);
      ctx.lineWidth = 1.5;
      const u = m.u * TRAJ_SCALE;
      const v = m.v * TRAJ_SCALE;
      ctx.beginPath();
      ctx.moveTo(u - 5, v - 5);
      ctx.lineTo(u + 5, v + 5);
      ctx.moveTo(u - 5, v + 5);
      ctx.lineTo(u + 5, v - 5);
      ctx.stroke();
    }

    // current heading
    const tip = path[path.length - 1]!;
    ctx.fillStyle = "#ffffff";
    ctx.beginPath();
    ctx.arc(tip.u * TRAJ_SCALE, tip.v * TRAJ_SCALE, 3, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = "#ffffff";
    ctx.beginPath();
    ctx.moveTo(tip.u * TRAJ_SCALE, tip.v * TRAJ_SCALE);
    ctx.lineTo(
      (tip.u + 3 * Math.cos(tip.yaw)) * TRAJ_SCALE,
      (tip.v + 3 * Math.sin(tip.yaw)) * TRAJ_SCALE,
    );
    ctx.stroke();
  }

  private lastWhatifKey = "";

  private async drawWhatif(): Promise<void> {
    const frames = this.cockpit.whatifFrames;
    const key = frames.map((f) => `${f.k}:${f.payload.length}`).join(",");
    if (key === this.lastWhatifKey) return;
    this.lastWhatifKey = key;
    this.whatifStrip.replaceChildren();
    const size = this.cockpit.hello?.image_size ?? 64;
    for (const f of frames) {
      const cell = document.createElement("div");
      cell.className = "whatif-cell";
      const label = document.createElement("div");
      label.className = "panel-tick";
      label.textContent = `+${f.k}`;
      const canvas = document.createElement("canvas");
      canvas.width = size;
      canvas.height = size;
      canvas.style.width = `${size * 2}px`;
      canvas.style.height = `${size * 2}px`;
      cell.append(label, canvas);
      this.whatifStrip.append(cell);
      try {
        const img = await decodePng(f.payload);
        const ctx = canvas.getContext("2d")!;
        ctx.imageSmoothingEnabled = false;
        ctx.drawImage(img, 0, 0);
      } catch {
        label.textContent = `+${f.k} (undecodable)`;
      }
    }
  }
}
