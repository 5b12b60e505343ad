/**
 * Key state to action mapping. W/S drive forward and back, A/D strafe,
 * arrow keys turn. Magnitudes sit well inside the protocol caps so a
 * config with tighter world limits still accepts them.
 */

import type { ActionDelta } from "./protocol.js";

export const FORWARD = 0.3;
export const REVERSE = 0.12;
export const STRAFE = 0.15;
export const TURN = 0.4;

export class KeyState {
  private down = new Set<string>();

  press(code: string): void {
    this.down.add(code);
  }

  release(code: string): void {
    this.down.delete(code);
  }

  clear(): void {
    this.down.clear();
  }

  /** The action one tick of the current key state produces. */
  action(): ActionDelta {
    const has = (c: string) => this.down.has(c);
    let dx = 0;
    let dy = 0;
    let dphi = 0;
    if (has("KeyW")) dx += FORWARD;
    if (has("KeyS")) dx -= REVERSE;
    if (has("KeyA")) dy += STRAFE;
    if (has("KeyD")) dy -= STRAFE;
    if (has("ArrowLeft")) dphi += TURN;
    if (has("ArrowRight")) dphi -= TURN;
    return { dx, dy, dphi };
  }
}
