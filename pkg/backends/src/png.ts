/** Thin PNG loader: file in, flat RGBA plus a luminance view out. */

import * as fs from "node:fs";
import { PNG } from "pngjs";

export interface DecodedImage {
  width: number;
  height: number;
  /** RGBA, 4 bytes per pixel, row-major. */
  rgba: Uint8Array;
}

export function readPng(filePath: string): DecodedImage {
  const png = PNG.sync.read(fs.readFileSync(filePath));
  return { width: png.width, height: png.height, rgba: new Uint8Array(png.data) };
}

/** Rec. 601 luma, one float per pixel. */
export function luminance(image: DecodedImage): Float64Array {
  const out = new Float64Array(image.width * image.height);
  const { rgba } = image;
  for (let i = 0; i < out.length; i++) {
    out[i] = 0.299 * rgba[i * 4] + 0.587 * rgba[i * 4 + 1] + 0.114 * rgba[i * 4 + 2];
  }
  return out;
}
