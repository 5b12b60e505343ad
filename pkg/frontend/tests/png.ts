/**
 * Minimal PNG decoder for tests. The browser decodes payloads natively via
 * Image; node has no codec, so tests unfilter the IDAT stream themselves.
 * Handles what the service emits: 8-bit RGB or RGBA, no interlace.
 */

import { inflateSync } from "node:zlib";

export interface DecodedPng {
  width: number;
  height: number;
  rgba: Uint8Array;
}

const SIGNATURE = [137, 80, 78, 71, 13, 10, 26, 10];

export function decodePng(buf: Uint8Array): DecodedPng {
  for (let i = 0; i < 8; i++) {
    if (buf[i] !== SIGNATURE[i]) throw new Error("not a png");
  }
  const dv = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  let off = 8;
  let width = 0;
  let height = 0;
  let bitDepth = 0;
  let colorType = 0;
  let interlace = 0;
  const idat: Buffer[] = [];
  while (off < buf.length) {
    const len = dv.getUint32(off);
    const type = String.fromCharCode(buf[off + 4]!, buf[off + 5]!, buf[off + 6]!, buf[off + 7]!);
    if (type === "IHDR") {
      width = dv.getUint32(off + 8);
      height = dv.getUint32(off + 12);
      bitDepth = buf[off + 16]!;
      colorType = buf[off + 17]!;
      interlace = buf[off + 20]!;
    } else if (type === "IDAT") {
      idat.push(Buffer.from(buf.subarray(off + 8, off + 8 + len)));
    } else if (type === "IEND") {
      break;
    }
    off += 12 + len; // length + type + data + crc
  }
  if (bitDepth !== 8 || (colorType !== 2 && colorType !== 6) || interlace !== 0) {
    throw new Error(`unsupported png: depth ${bitDepth}, color type ${colorType}, interlace ${interlace}`);
  }
  const channels = colorType === 2 ? 3 : 4;
  const raw = inflateSync(Buffer.concat(idat));
  const stride = width * channels;
  const rgba = new Uint8Array(width * height * 4);
  const prev = new Uint8Array(stride);
  const cur = new Uint8Array(stride);
  let p = 0;
  for (let y = 0; y < height; y++) {
    const filter = raw[p++]!;
    for (let i = 0; i < stride; i++) {
      const x = raw[p + i]!;
      const a = i >= channels ? cur[i - channels]! : 0;
      const b = prev[i]!;
      const c = i >= channels ? prev[i - channels]! : 0;
      let v: number;
      switch (filter) {
        case 0:
          v = x;
          break;
        case 1:
          v = x + a;
          break;
        case 2:
          v = x + b;
          break;
        case 3:
          v = x + ((a + b) >> 1);
          break;
        case 4: {
          const p0 = a + b - c;
          const pa = Math.abs(p0 - a);
          const pb = Math.abs(p0 - b);
          const pc = Math.abs(p0 - c);
          v = x + (pa <= pb && pa <= pc ? a : pb <= pc ? b : c);
          break;
        }
        default:
          throw new Error(`bad filter byte ${filter}`);
      }
      cur[i] = v & 0xff;
    }
    p += stride;
    for (let col = 0; col < width; col++) {
      const s = col * channels;
      const d = (y * width + col) * 4;
      rgba[d] = cur[s]!;
      rgba[d + 1] = cur[s + 1]!;
      rgba[d + 2] = cur[s + 2]!;
      rgba[d + 3] = channels === 4 ? cur[s + 3]! : 255;
    }
    prev.set(cur);
  }
  return { width, height, rgba };
}

export function decodeBase64Png(payload: string): DecodedPng {
  return decodePng(Buffer.from(payload, "base64"));
}

/** Sum of the RGB channels, matching how the fixture oracle counts. */
export function rgbSum(png: DecodedPng): number {
  let s = 0;
  for (let i = 0; i < png.rgba.length; i += 4) {
    s += png.rgba[i]! + png.rgba[i + 1]! + png.rgba[i + 2]!;
  }
  return s;
}
