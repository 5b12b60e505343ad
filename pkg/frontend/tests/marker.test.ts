import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { MIN_PIXELS, detectMarker } from "../src/marker.js";
import { decodeBase64Png, rgbSum } from "./png.js";

interface MarkerCase {
  pose: [number, number, number];
  payload: string;
  size: number;
  found: boolean;
  u: number;
  v: number;
  angle: number;
  count: number;
  pixel_sum: number;
}

const CASES: MarkerCase[] = JSON.parse(
  readFileSync(fileURLToPath(new URL("./fixtures/marker_cases.json", import.meta.url)), "utf8"),
);

function blank(size: number): Uint8ClampedArray {
  const data = new Uint8ClampedArray(size * size * 4);
  for (let i = 3; i < data.length; i += 4) data[i] = 255;
  return data;
}

function paint(data: Uint8ClampedArray, size: number, x: number, y: number, r: number): void {
  const o = (y * size + x) * 4;
  data[o] = r;
  data[o + 1] = 0;
  data[o + 2] = 0;
}

describe("fixture parity with the reference detector", () => {
  it("reproduces u, v, angle and count on rendered frames", () => {
    expect(CASES.length).toBeGreaterThan(0);
    for (const c of CASES) {
      const png = decodeBase64Png(c.payload);
      expect(png.width).toBe(c.size);
      expect(png.height).toBe(c.size);
      // the decoder itself is checked against the oracle's pixel sum
      expect(rgbSum(png)).toBe(c.pixel_sum);

      const hit = detectMarker(png.rgba, png.width, png.height);
      expect(hit.found).toBe(c.found);
      expect(hit.count).toBe(c.count);
      expect(hit.u).toBeCloseTo(c.u, 6);
      expect(hit.v).toBeCloseTo(c.v, 6);
      expect(hit.angle).toBeCloseTo(c.angle, 6);
    }
  });
});

describe("synthetic frames", () => {
  it("finds nothing on a black frame", () => {
    const hit = detectMarker(blank(32), 32, 32);
    expect(hit.found).toBe(false);
    expect(hit.count).toBe(0);
  });

  it("needs at least MIN_PIXELS red pixels", () => {
    const data = blank(32);
    for (let i = 0; i < MIN_PIXELS - 1; i++) paint(data, 32, 10 + i, 10, 255);
    const hit = detectMarker(data, 32, 32);
    expect(hit.found).toBe(false);
    expect(hit.count).toBe(MIN_PIXELS - 1);
  });

  it("ignores pixels that are bright but not marker-red", () => {
    const data = blank(32);
    for (let i = 0; i < 6; i++) {
      const o = ((8 + i) * 32 + 8) * 4;
      data[o] = 255;
      data[o + 1] = 200; // too green
      data[o + 2] = 0;
    }
    expect(detectMarker(data, 32, 32).found).toBe(false);
  });

  it("centroid of a uniform block is its center", () => {
    const data = blank(64);
    for (let y = 20; y < 23; y++) {
      for (let x = 10; x < 13; x++) paint(data, 64, x, y, 255);
    }
    const hit = detectMarker(data, 64, 64);
    expect(hit.found).toBe(true);
    expect(hit.u).toBeCloseTo(11.5, 12);
    expect(hit.v).toBeCloseTo(21.5, 12);
  });

  it("red excess weights the centroid", () => {
    const data = blank(64);
    // four pixels in a row; the right pair is twice the excess of the left
    paint(data, 64, 10, 30, 210);
    paint(data, 64, 11, 30, 210);
    paint(data, 64, 12, 30, 255);
    paint(data, 64, 13, 30, 255);
    // excesses 210, 210, 255, 255 at u = 10.5 .. 13.5
    const expected = (210 * 10.5 + 210 * 11.5 + 255 * 12.5 + 255 * 13.5) / (2 * 210 + 2 * 255);
    const hit = detectMarker(data, 64, 64);
    expect(hit.u).toBeCloseTo(expected, 12);
    expect(hit.v).toBeCloseTo(30.5, 12);
  });

  it("heading points from the wide base toward the tip", () => {
    const data = blank(64);
    // triangle pointing +u: tall base on the left, single pixel at the tip
    for (let dy = -3; dy <= 3; dy++) paint(data, 64, 20, 32 + dy, 255);
    for (let dy = -2; dy <= 2; dy++) paint(data, 64, 22, 32 + dy, 255);
    for (let dy = -1; dy <= 1; dy++) paint(data, 64, 24, 32 + dy, 255);
    paint(data, 64, 26, 32, 255);
    const hit = detectMarker(data, 64, 64);
    expect(hit.found).toBe(true);
    const wrapped = Math.min(hit.angle, 2 * Math.PI - hit.angle);
    expect(wrapped).toBeLessThan(0.2);
  });

  it("rejects a buffer whose length disagrees with the shape", () => {
    expect(() => detectMarker(new Uint8Array(7), 2, 2)).toThrow(/expected/);
  });
});
