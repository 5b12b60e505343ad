/**
 * Cockpit bootstrap: wire the socket, the session state, the keyboard,
 * and the renderer together. Single event loop; socket callbacks only
 * append state, drawing happens once per animation frame.
 */

import { Cockpit } from "./cockpit.js";
import { KeyState } from "./keyboard.js";
import { type ActionDelta, type ClientMessage, PROTOCOL_VERSION, parseServerMessage } from "./protocol.js";
import { Renderer } from "./render.js";
import { CockpitSocket } from "./socket.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const params = new URLSearchParams(location.search);
const wsUrl = params.get("ws") ?? "ws://localhost:8765";

const cockpit = new Cockpit();
const keys = new KeyState();
const renderer = new Renderer(
  cockpit,
  el("panels"),
  el<HTMLCanvasElement>("trajectory"),
  el("whatif-strip"),
);

const banner = el("banner");
const hud = el("hud");
const errorLine = el("error-line");
const steerSelect = el<HTMLSelectElement>("steer-view");
const imaginedBox = el("imagined-views");
const seedInput = el<HTMLInputElement>("reset-seed");
const pauseBox = el<HTMLInputElement>("pause");
const whatifView = el<HTMLSelectElement>("whatif-view");
const whatifMacro = el<HTMLSelectElement>("whatif-macro");
const whatifHorizon = el<HTMLInputElement>("whatif-horizon");

let truthTimes: number[] = []; // recent truth-frame arrivals, for the Hz meter
let tickTimer: ReturnType<typeof setInterval> | null = null;

const socket = new CockpitSocket(wsUrl, {
  onMessage(text) {
    const msg = parseServerMessage(text);
    if (!msg) {
      errorLine.textContent = "dropped a message the protocol does not define";
      return;
    }
    if (msg.type === "hello" && msg.version !== PROTOCOL_VERSION) {
      banner.textContent = `protocol version ${msg.version} not supported`;
      banner.className = "banner error";
      socket.close();
      return;
    }
    cockpit.onServer(msg);
    if (msg.type === "hello") {
      buildControls();
      restartTickLoop();
    }
    if (msg.type === "configure") renderer.syncPanels();
    if (msg.type === "error") {
      errorLine.textContent = `service rejected ${msg.field}: ${msg.error}`;
    }
    if (msg.type === "frame" && msg.source === "truth") {
      truthTimes.push(performance.now());
    }
  },
  onStatus(connected, detail) {
    banner.textContent = connected ? "" : `disconnected, ${detail}`;
    banner.className = connected ? "banner hidden" : "banner error";
    if (!connected && tickTimer) {
      clearInterval(tickTimer);
      tickTimer = null;
      keys.clear();
    }
  },
});

function send(msg: ClientMessage): void {
  try {
    socket.send(msg);
  } catch (e) {
    errorLine.textContent = String(e instanceof Error ? e.message : e);
  }
}

function buildControls(): void {
  const h = cockpit.hello;
  if (!h) return;
  steerSelect.replaceChildren(
    ...h.views.map((v) => new Option(v.toUpperCase(), v, false, v === h.steer_view)),
  );
  whatifView.replaceChildren(...h.views.map((v) => new Option(v.toUpperCase(), v)));
  imaginedBox.replaceChildren(
    ...h.views.map((v) => {
      const label = document.createElement("label");
      const box = document.createElement("input");
      box.type = "checkbox";
      box.value = v;
      box.checked = h.imagined_views.includes(v);
      box.addEventListener("change", sendConfigure);
      label.append(box, ` ${v.toUpperCase()}`);
      return label;
    }),
  );
  renderer.syncPanels();
}

function sendConfigure(): void {
  const imagined = [...imaginedBox.querySelectorAll<HTMLInputElement>("input:checked")].map(
    (b) => b.value,
  );
  send({ type: "configure", steer_view: steerSelect.value, imagined_views: imagined });
}

function restartTickLoop(): void {
  if (tickTimer) clearInterval(tickTimer);
  const fps = cockpit.hello?.fps ?? 5;
  tickTimer = setInterval(() => {
    if (pauseBox.checked || !socket.ready) return;
    send({ type: "action", ...keys.action() });
  }, 1000 / fps);
}

const MACROS: Record<string, (i: number) => ActionDelta> = {
  "dash forward": () => ({ dx: 0.4, dy: 0, dphi: 0 }),
  "arc left": () => ({ dx: 0.3, dy: 0, dphi: 0.3 }),
  "arc right": () => ({ dx: 0.3, dy: 0, dphi: -0.3 }),
  "u-turn": (i) => ({ dx: 0.15, dy: 0, dphi: i < 4 ? 0.55 : 0 }),
  "strafe left": () => ({ dx: 0.1, dy: 0.15, dphi: 0 }),
};

el("whatif-fire").addEventListener("click", () => {
  const macro = MACROS[whatifMacro.value] ?? MACROS["dash forward"]!;
  const horizon = Math.max(1, Math.min(100, Number(whatifHorizon.value) || 5));
  const actions = Array.from({ length: horizon }, (_, i) => macro(i));
  send({ type: "whatif", view: whatifView.value, actions, horizon });
});

el("reset-btn").addEventListener("click", () => {
  send({ type: "reset", seed: Number(seedInput.value) || 0 });
});

steerSelect.addEventListener("change", sendConfigure);

window.addEventListener("keydown", (e) => {
  if (e.target instanceof HTMLInputElement || e.target instanceof HTMLSelectElement) return;
  keys.press(e.code);
});
window.addEventListener("keyup", (e) => keys.release(e.code));
window.addEventListener("blur", () => keys.clear());

function hudText(): string {
  const h = cockpit.hello;
  if (!h) return "waiting for hello";
  const now = performance.now();
  truthTimes = truthTimes.filter((t) => now - t < 2000);
  const hz = truthTimes.length / 2;
  return (
    `session ${h.session} · checkpoint ${h.checkpoint} · ${h.image_size}px · ` +
    `tick ${cockpit.tick} · ${hz.toFixed(1)} Hz` +
    (cockpit.pose ? ` · pose (${cockpit.pose[0].toFixed(2)}, ${cockpit.pose[1].toFixed(2)})` : "")
  );
}

async function frameLoop(): Promise<void> {
  await renderer.flush();
  hud.textContent = hudText();
  requestAnimationFrame(() => void frameLoop());
}

socket.connect();
requestAnimationFrame(() => void frameLoop());
