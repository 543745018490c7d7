/**
 * Segmenter backends: attach an RLE mask to each detection. A mask is a
 * strictly optional upgrade — the pipeline falls back to the box
 * footprint for any detection without one — so per-box failures just
 * leave that box unmasked.
 *
 *  - `stub`: the box footprint itself, as an explicit mask.
 *  - `threshold`: inside each box, foreground = pixels on the same side
 *    of the global Otsu split as the box center. Good enough to carve a
 *    synthetic object out of a plain background.
 */

import type { DecodedImage } from "./png.js";
import { luminance, readPng } from "./png.js";
import type { BackendManifest } from "./manifest.js";
import type { Box, DetectionDoc, MaskEntry } from "./interchange.js";
import { encodeRle, writeDetectionDoc } from "./interchange.js";
import { lumaBin, otsuThreshold } from "./detectors.js";

export type SegmenterId = "stub" | "threshold";

function clampBox(box: Box, width: number, height: number): [number, number, number, number] {
  const x0 = Math.max(0, Math.floor(box[0]));
  const y0 = Math.max(0, Math.floor(box[1]));
  const x1 = Math.min(width, Math.ceil(box[2]));
  const y1 = Math.min(height, Math.ceil(box[3]));
  return [x0, y0, x1, y1];
}

function boxMask(image: DecodedImage, box: Box): MaskEntry {
  const [x0, y0, x1, y1] = clampBox(box, image.width, image.height);
  if (x1 <= x0 || y1 <= y0) throw new Error(`box ${box} has no pixel footprint`);
  const grid = new Uint8Array(image.width * image.height);
  for (let y = y0; y < y1; y++) grid.fill(1, y * image.width + x0, y * image.width + x1);
  return { width: image.width, height: image.height, rle: encodeRle(grid, image.width, image.height) };
}

function thresholdMask(image: DecodedImage, luma: Float64Array, split: number, box: Box): MaskEntry {
  const [x0, y0, x1, y1] = clampBox(box, image.width, image.height);
  if (x1 <= x0 || y1 <= y0) throw new Error(`box ${box} has no pixel footprint`);
  const cx = Math.min(image.width - 1, Math.floor((x0 + x1) / 2));
  const cy = Math.min(image.height - 1, Math.floor((y0 + y1) / 2));
  const centerDark = lumaBin(luma[cy * image.width + cx]) <= split;
  const grid = new Uint8Array(image.width * image.height);
  let any = false;
  for (let y = y0; y < y1; y++) {
    for (let x = x0; x < x1; x++) {
      const idx = y * image.width + x;
      if ((lumaBin(luma[idx]) <= split) === centerDark) {
        grid[idx] = 1;
        any = true;
      }
    }
  }
  if (!any) throw new Error(`box ${box} segmented to an empty region`);
  return { width: image.width, height: image.height, rle: encodeRle(grid, image.width, image.height) };
}

export interface SegmenterRun {
  doc: DetectionDoc;
  /** detection index -> error message for boxes that could not be masked. */
  errors: Record<string, string>;
}

export function segmentDoc(
  image: DecodedImage,
  doc: DetectionDoc,
  segmenter: SegmenterId,
): SegmenterRun {
  const masks: Record<string, MaskEntry> = { ...doc.masks };
  const errors: Record<string, string> = {};
  let luma: Float64Array | null = null;
  let split = 0;
  if (segmenter === "threshold") {
    // Same split the blob detector uses, so masks agree with proposals.
    luma = luminance(image);
    split = otsuThreshold(luma);
  }
  doc.detections.forEach((det, index) => {
    if (masks[String(index)] !== undefined) return; // already masked upstream
    try {
      masks[String(index)] =
        segmenter === "stub"
          ? boxMask(image, det.box)
          : thresholdMask(image, luma!, split, det.box);
    } catch (err) {
      errors[String(index)] = err instanceof Error ? err.message : String(err);
    }
  });
  return { doc: { ...doc, masks }, errors };
}

/** Manifest entry point: read the detections file, mask, write back. */
export function runSegmenter(manifest: BackendManifest, doc: DetectionDoc): SegmenterRun {
  if (!manifest.segmenter) {
    return { doc, errors: {} };
  }
  const image = readPng(manifest.image);
  const run = segmentDoc(image, doc, manifest.segmenter);
  writeDetectionDoc(manifest.out.detections, run.doc);
  return run;
}
