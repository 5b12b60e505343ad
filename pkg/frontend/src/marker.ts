/**
 * Agent marker localization in bird's-eye frames, mirroring the detector
 * the evaluation suite uses server-side: threshold on strong red, weight
 * pixels by red excess, take the weighted centroid, recover heading from
 * the principal axis with the sign resolved by mass skewness (the
 * triangular marker is wider at its base, so the tail points at the tip).
 */

export const R_MIN = 200;
export const G_MAX = 80;
export const B_MAX = 80;
export const MIN_PIXELS = 4;

export interface MarkerHit {
  found: boolean;
  u: number; // continuous image coords, pixel (i, j) covers [i, i+1)
  v: number;
  angle: number; // heading of the tip, [0, 2pi)
  count: number;
}

const MISS: MarkerHit = { found: false, u: NaN, v: NaN, angle: NaN, count: 0 };

/**
 * Detect the marker in RGBA pixel data (as read from a canvas). Returns
 * image coordinates in the frame's own pixel units.
 */
export function detectMarker(data: Uint8ClampedArray | Uint8Array, width: number, height: number): MarkerHit {
  if (data.length !== width * height * 4) {
    throw new Error(`pixel buffer is ${data.length} bytes, expected ${width * height * 4}`);
  }

  const us: number[] = [];
  const vs: number[] = [];
  const wk: number[] = [];
  let total = 0;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const o = (y * width + x) * 4;
      const r = data[o]!;
      const g = data[o + 1]!;
      const b = data[o + 2]!;
      if (r >= R_MIN && g <= G_MAX && b <= B_MAX) {
        const w = Math.max(0, r - Math.max(g, b));
        us.push(x + 0.5);
        vs.push(y + 0.5);
        wk.push(w);
        total += w;
      }
    }
  }
  const count = us.length;
  if (count < MIN_PIXELS || total === 0) return { ...MISS, count };

  let muU = 0;
  let muV = 0;
  for (let i = 0; i < count; i++) {
    muU += wk[i]! * us[i]!;
    muV += wk[i]! * vs[i]!;
  }
  muU /= total;
  muV /= total;

  let cuu = 0;
  let cvv = 0;
  let cuv = 0;
  for (let i = 0; i < count; i++) {
    const du = us[i]! - muU;
    const dv = vs[i]! - muV;
    cuu += wk[i]! * du * du;
    cvv += wk[i]! * dv * dv;
    cuv += wk[i]! * du * dv;
  }
  cuu /= total;
  cvv /= total;
  cuv /= total;

  const theta = 0.5 * Math.atan2(2 * cuv, cuu - cvv);
  let ex = Math.cos(theta);
  let ey = Math.sin(theta);

  let skew = 0;
  let farI = 0;
  let farD = -1;
  for (let i = 0; i < count; i++) {
    const du = us[i]! - muU;
    const dv = vs[i]! - muV;
    const proj = du * ex + dv * ey;
    skew += wk[i]! * proj * proj * proj;
    const d2 = du * du + dv * dv;
    if (d2 > farD) {
      farD = d2;
      farI = i;
    }
  }
  if (skew === 0) {
    skew = (us[farI]! - muU) * ex + (vs[farI]! - muV) * ey;
  }
  if (skew < 0) {
    ex = -ex;
    ey = -ey;
  }
  let angle = Math.atan2(ey, ex) % (2 * Math.PI);
  if (angle < 0) angle += 2 * Math.PI;

  return { found: true, u: muU, v: muV, angle, count };
}
