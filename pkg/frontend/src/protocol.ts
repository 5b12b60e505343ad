/**
 * Wire protocol for the imagination service.
 *
 * One JSON object per websocket text message. The shapes here mirror
 * docs/protocol.md in the repository root; tests replay the recorded
 * transcript in tests/golden/ against them. Outbound messages are
 * validated before sending so a UI bug cannot put an off-protocol
 * message on the wire.
 */

export const PROTOCOL_VERSION = 1;
export const MAX_WHATIF_HORIZON = 100;

// conservative client-side magnitude caps; the server enforces the real
// per-world limits and reports the offending field on violation
export const ACTION_LIMIT = { dx: 0.5, dy: 0.5, dphi: 0.6 };

export interface ActionDelta {
  dx: number;
  dy: number;
  dphi: number;
}

export type ClientMessage =
  | { type: "configure"; steer_view?: string; imagined_views?: string[]; checkpoint?: string }
  | ({ type: "action" } & ActionDelta)
  | { type: "whatif"; view: string; actions: ActionDelta[]; horizon?: number }
  | { type: "reset"; seed: number; pose?: [number, number, number] };

export interface Hello {
  type: "hello";
  tick: number;
  version: number;
  session: string;
  checkpoint: string;
  image_size: number;
  fps: number;
  world_side: number;
  views: string[];
  steer_view: string;
  imagined_views: string[];
}

export interface ConfigureAck {
  type: "configure";
  tick: number;
  steer_view: string;
  imagined_views: string[];
  checkpoint: string;
}

export interface ResetAck {
  type: "reset";
  tick: number;
  pose: [number, number, number];
}

export type FrameSource = "truth" | "imagined" | "whatif";

export interface Frame {
  type: "frame";
  tick: number;
  view: string;
  source: FrameSource;
  encoding: "png-base64";
  payload: string;
  pose?: [number, number, number]; // truth frames only
  k?: number; // whatif frames only: lookahead in ticks
}

export interface ErrorMessage {
  type: "error";
  tick: number;
  error: string;
  field: string;
}

export type ServerMessage = Hello | ConfigureAck | ResetAck | Frame | ErrorMessage;

function isRecord(x: unknown): x is Record<string, unknown> {
  return typeof x === "object" && x !== null && !Array.isArray(x);
}

function finiteNumber(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

function stringArray(x: unknown): x is string[] {
  return Array.isArray(x) && x.every((v) => typeof v === "string");
}

function isPose(x: unknown): x is [number, number, number] {
  return Array.isArray(x) && x.length === 3 && x.every(finiteNumber);
}

/** Parse an inbound server message; null when the shape is not one we know. */
export function parseServerMessage(text: string): ServerMessage | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  if (!isRecord(raw) || typeof raw.type !== "string") return null;
  const m = raw;
  switch (m.type) {
    case "hello":
      if (
        finiteNumber(m.tick) && finiteNumber(m.version) &&
        typeof m.session === "string" && typeof m.checkpoint === "string" &&
        finiteNumber(m.image_size) && finiteNumber(m.fps) &&
        finiteNumber(m.world_side) && stringArray(m.views) &&
        typeof m.steer_view === "string" && stringArray(m.imagined_views)
      ) {
        return m as unknown as Hello;
      }
      return null;
    case "configure":
      if (
        finiteNumber(m.tick) && typeof m.steer_view === "string" &&
        stringArray(m.imagined_views) && typeof m.checkpoint === "string"
      ) {
        return m as unknown as ConfigureAck;
      }
      return null;
    case "reset":
      if (finiteNumber(m.tick) && isPose(m.pose)) {
        return m as unknown as ResetAck;
      }
      return null;
    case "frame": {
      const sourceOk = m.source === "truth" || m.source === "imagined" || m.source === "whatif";
      if (
        finiteNumber(m.tick) && typeof m.view === "string" && sourceOk &&
        m.encoding === "png-base64" && typeof m.payload === "string" &&
        (m.pose === undefined || isPose(m.pose)) &&
        (m.k === undefined || finiteNumber(m.k))
      ) {
        return m as unknown as Frame;
      }
      return null;
    }
    case "error":
      if (finiteNumber(m.tick) && typeof m.error === "string" && typeof m.field === "string") {
        return m as unknown as ErrorMessage;
      }
      return null;
    default:
      return null;
  }
}

function checkDelta(d: Record<string, unknown>, where: string): string | null {
  for (const key of ["dx", "dy", "dphi"] as const) {
    const v = d[key];
    if (!finiteNumber(v)) return `${where}${key} must be a finite number`;
    if (Math.abs(v) > ACTION_LIMIT[key]) {
      return `${where}${key} magnitude exceeds ${ACTION_LIMIT[key]}`;
    }
  }
  return null;
}

/**
 * Validate an outbound message against the client schema. Returns null when
 * valid, otherwise a human-readable reason. The socket layer refuses to
 * send anything this rejects.
 */
export function validateClientMessage(msg: unknown): string | null {
  if (!isRecord(msg)) return "message must be an object";
  switch (msg.type) {
    case "configure": {
      if (msg.steer_view !== undefined && typeof msg.steer_view !== "string") {
        return "steer_view must be a view name";
      }
      if (msg.imagined_views !== undefined && !stringArray(msg.imagined_views)) {
        return "imagined_views must be an array of view names";
      }
      if (msg.checkpoint !== undefined && typeof msg.checkpoint !== "string") {
        return "checkpoint must be a string";
      }
      return null;
    }
    case "action":
      return checkDelta(msg, "");
    case "whatif": {
      if (typeof msg.view !== "string") return "view must be a view name";
      if (!Array.isArray(msg.actions) || msg.actions.length === 0) {
        return "actions must be a non-empty array";
      }
      for (let i = 0; i < msg.actions.length; i++) {
        const a: unknown = msg.actions[i];
        if (!isRecord(a)) return `actions[${i}] must be an object`;
        const bad = checkDelta(a, `actions[${i}].`);
        if (bad) return bad;
      }
      if (msg.horizon !== undefined) {
        if (!Number.isInteger(msg.horizon)) return "horizon must be an integer";
        const h = msg.horizon as number;
        if (h < 1 || h > MAX_WHATIF_HORIZON) {
          return `horizon must be in [1, ${MAX_WHATIF_HORIZON}]`;
        }
        if (msg.actions.length > h) return "more actions than horizon";
      }
      return null;
    }
    case "reset": {
      if (!Number.isInteger(msg.seed)) return "seed must be an integer";
      if (msg.pose !== undefined && !isPose(msg.pose)) {
        return "pose must be [x, y, yaw]";
      }
      return null;
    }
    default:
      return `unknown message type ${JSON.stringify(msg.type)}`;
  }
}
