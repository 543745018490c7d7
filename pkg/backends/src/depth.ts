/**
 * Relative-depth backend. The shipped estimator is a luminance proxy:
 * it treats darker pixels as nearer, which holds for synthetic indoor
 * scenes lit from the back (bright wall far away, shaded furniture up
 * front). It is deliberately simple — the value of this adapter is the
 * normalization contract, not the estimate.
 *
 * Estimators disagree on sign (some emit higher = farther), so the raw
 * estimate declares its polarity and the adapter always flips as needed:
 * the PGM on disk is invariably higher = nearer, min-max normalized.
 */

import { luminance, readPng } from "./png.js";
import type { BackendManifest } from "./manifest.js";
import { encodeDepthPgm, writeFileAtomic } from "./interchange.js";

export interface RawDepthEstimate {
  values: Float64Array;
  width: number;
  height: number;
  /** true when larger raw values mean farther from the camera. */
  higherIsFarther: boolean;
}

export function luminanceDepthEstimate(imagePath: string): RawDepthEstimate {
  const image = readPng(imagePath);
  return {
    values: luminance(image),
    width: image.width,
    height: image.height,
    higherIsFarther: true, // bright backdrop = far, per the proxy above
  };
}

/**
 * Normalize a raw estimate onto the wire contract: orient so higher is
 * nearer, then min-max scale to [0, 1]. A constant input has no
 * ordering information and maps to all zeros.
 */
export function normalizeDepth(raw: RawDepthEstimate): Float64Array {
  const oriented = new Float64Array(raw.values.length);
  for (let i = 0; i < raw.values.length; i++) {
    oriented[i] = raw.higherIsFarther ? -raw.values[i] : raw.values[i];
  }
  let min = Infinity;
  let max = -Infinity;
  for (const v of oriented) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  const range = max - min;
  const out = new Float64Array(oriented.length);
  if (range > 0) {
    for (let i = 0; i < oriented.length; i++) out[i] = (oriented[i] - min) / range;
  }
  return out;
}

/** Manifest entry point: estimate, normalize, write the 16-bit PGM. */
export function runDepth(manifest: BackendManifest): { width: number; height: number } {
  const raw = luminanceDepthEstimate(manifest.image);
  const normalized = normalizeDepth(raw);
  writeFileAtomic(manifest.out.depth, encodeDepthPgm(normalized, raw.width, raw.height));
  return { width: raw.width, height: raw.height };
}
