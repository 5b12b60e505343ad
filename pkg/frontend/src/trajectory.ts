/**
 * Pure geometry and color helpers for the trajectory panel. Time is shown
 * as a blue-to-red gradient: early points cold, recent points hot.
 */

export function pathColor(frac: number): string {
  const t = Math.min(1, Math.max(0, frac));
  const r = Math.round(235 * t + 20);
  const b = Math.round(235 * (1 - t) + 20);
  return `rgb(${r}, 60, ${b})`;
}

/** Gradient position for a tick within the observed tick range. */
export function tickFrac(tick: number, first: number, last: number): number {
  if (last <= first) return 1;
  return (tick - first) / (last - first);
}
