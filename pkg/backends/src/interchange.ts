/**
 * The wire contract with the scenemark pipeline.
 *
 * Two file formats leave this package and nothing else does:
 *
 *  - detections JSON: `image` metadata, a flat `detections` array where
 *    every entry carries the detector that produced it, and an optional
 *    `masks` map keyed by detection index holding row-major RLE grids
 *    that always start with the background run;
 *  - depth PGM: binary 16-bit `P5`, image-sized, min-max normalized,
 *    higher value = nearer to the camera.
 *
 * Keep this file dependency-free so the formats stay auditable.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export type Box = [number, number, number, number];

export interface DetectionEntry {
  detector_id: string;
  class_label: string;
  confidence: number;
  box: Box;
}

export interface MaskEntry {
  width: number;
  height: number;
  rle: number[];
}

export interface DetectionDoc {
  image: { path: string; width: number; height: number };
  detections: DetectionEntry[];
  masks: Record<string, MaskEntry>;
}

/**
 * Row-major run-length encoding of a binary grid. The first count is
 * always the background run, so a grid whose first pixel is foreground
 * encodes a leading zero. Counts sum to width*height.
 */
export function encodeRle(grid: Uint8Array, width: number, height: number): number[] {
  if (grid.length !== width * height) {
    throw new Error(`grid has ${grid.length} cells, expected ${width * height}`);
  }
  const counts: number[] = [];
  let current = 0; // runs alternate background, foreground, background, ...
  let run = 0;
  for (let i = 0; i < grid.length; i++) {
    const value = grid[i] ? 1 : 0;
    if (value === current) {
      run += 1;
    } else {
      counts.push(run);
      current = value;
      run = 1;
    }
  }
  counts.push(run);
  return counts;
}

/** Inverse of {@link encodeRle}; used only to sanity-check round trips. */
export function decodeRle(counts: number[], width: number, height: number): Uint8Array {
  const grid = new Uint8Array(width * height);
  let pos = 0;
  let value = 0;
  for (const count of counts) {
    if (value) grid.fill(1, pos, pos + count);
    pos += count;
    value = 1 - value;
  }
  if (pos !== width * height) {
    throw new Error(`rle covers ${pos} cells, expected ${width * height}`);
  }
  return grid;
}

/**
 * Serialize a depth grid already normalized to [0, 1] as a binary
 * 16-bit PGM (big-endian sample order per the format spec).
 */
export function encodeDepthPgm(values: Float64Array, width: number, height: number): Buffer {
  if (values.length !== width * height) {
    throw new Error(`depth grid has ${values.length} cells, expected ${width * height}`);
  }
  const header = Buffer.from(`P5\n${width} ${height}\n65535\n`, "ascii");
  const body = Buffer.alloc(values.length * 2);
  for (let i = 0; i < values.length; i++) {
    const v = values[i];
    if (!(v >= 0 && v <= 1)) {
      throw new Error(`depth value ${v} at index ${i} outside [0, 1]`);
    }
    body.writeUInt16BE(Math.round(v * 65535), i * 2);
  }
  return Buffer.concat([header, body]);
}

/** Write via a temp file + rename so readers never observe a torn file. */
export function writeFileAtomic(target: string, data: Buffer | string): void {
  const dir = path.dirname(target);
  fs.mkdirSync(dir, { recursive: true });
  const tmp = path.join(dir, `.${path.basename(target)}.tmp-${process.pid}`);
  fs.writeFileSync(tmp, data);
  fs.renameSync(tmp, target);
}

export function writeDetectionDoc(target: string, doc: DetectionDoc): void {
  writeFileAtomic(target, JSON.stringify(doc, null, 2) + "\n");
}
