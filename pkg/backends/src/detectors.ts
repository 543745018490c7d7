/**
 * Detector backends. Real model adapters plug in behind the same
 * interface; the two shipped here are deliberately training-free so the
 * whole pipeline runs on a bare CPU:
 *
 *  - `stub`: one fixed centered box. Exists to exercise the interchange
 *    format and to give tests a box with known coordinates.
 *  - `blob`: Otsu-threshold + connected components over luminance. A
 *    genuine (if crude) proposal generator for synthetic scenes with
 *    distinct objects on a plain background.
 *
 * One failing backend must not take down the run: `runDetectors`
 * isolates each backend and reports its error while the others proceed.
 */

import type { DecodedImage } from "./png.js";
import { luminance, readPng } from "./png.js";
import type { BackendManifest } from "./manifest.js";
import { loadVocabulary } from "./manifest.js";
import type { DetectionDoc, DetectionEntry } from "./interchange.js";
import { writeDetectionDoc } from "./interchange.js";

export interface DetectorBackend {
  id: string;
  detect(image: DecodedImage, vocabulary: string[]): Omit<DetectionEntry, "detector_id">[];
}

export const stubDetector: DetectorBackend = {
  id: "stub",
  detect(image, vocabulary) {
    // A single box covering the middle 40% of each axis.
    const x0 = image.width * 0.3;
    const y0 = image.height * 0.3;
    return [
      {
        class_label: vocabulary[0],
        confidence: 0.9,
        box: [x0, y0, x0 + image.width * 0.4, y0 + image.height * 0.4],
      },
    ];
  },
};

/** Histogram bin for a luma value; thresholds compare in this domain. */
export function lumaBin(value: number): number {
  return Math.min(255, Math.max(0, Math.round(value)));
}

/** Otsu's threshold over a 256-bin luminance histogram. */
export function otsuThreshold(luma: Float64Array): number {
  const hist = new Array<number>(256).fill(0);
  for (const v of luma) hist[lumaBin(v)] += 1;
  const total = luma.length;
  let sum = 0;
  for (let i = 0; i < 256; i++) sum += i * hist[i];
  let sumB = 0;
  let weightB = 0;
  let best = 0;
  let bestBetween = -1;
  for (let t = 0; t < 256; t++) {
    weightB += hist[t];
    if (weightB === 0) continue;
    const weightF = total - weightB;
    if (weightF === 0) break;
    sumB += t * hist[t];
    const meanB = sumB / weightB;
    const meanF = (sum - sumB) / weightF;
    const between = weightB * weightF * (meanB - meanF) ** 2;
    if (between > bestBetween) {
      bestBetween = between;
      best = t;
    }
  }
  return best;
}

interface Component {
  area: number;
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

/**
 * 4-connected components of the minority side of an Otsu split.
 * Components smaller than minAreaFrac of the image are noise.
 */
export function findBlobs(image: DecodedImage, minAreaFrac = 0.005): Component[] {
  const { width, height } = image;
  const luma = luminance(image);
  const threshold = otsuThreshold(luma);
  // Objects are whichever side of the split covers less of the frame.
  let dark = 0;
  for (const v of luma) if (lumaBin(v) <= threshold) dark += 1;
  const darkIsObject = dark <= luma.length - dark;
  const isObject = (i: number) => (lumaBin(luma[i]) <= threshold) === darkIsObject;

  const labels = new Int32Array(width * height).fill(-1);
  const components: Component[] = [];
  const stack: number[] = [];
  for (let start = 0; start < labels.length; start++) {
    if (labels[start] !== -1 || !isObject(start)) continue;
    const label = components.length;
    const comp: Component = {
      area: 0,
      x0: width,
      y0: height,
      x1: -1,
      y1: -1,
    };
    stack.push(start);
    labels[start] = label;
    while (stack.length > 0) {
      const idx = stack.pop()!;
      const x = idx % width;
      const y = (idx - x) / width;
      comp.area += 1;
      if (x < comp.x0) comp.x0 = x;
      if (y < comp.y0) comp.y0 = y;
      if (x > comp.x1) comp.x1 = x;
      if (y > comp.y1) comp.y1 = y;
      const neighbours = [
        x > 0 ? idx - 1 : -1,
        x < width - 1 ? idx + 1 : -1,
        y > 0 ? idx - width : -1,
        y < height - 1 ? idx + width : -1,
      ];
      for (const n of neighbours) {
        if (n >= 0 && labels[n] === -1 && isObject(n)) {
          labels[n] = label;
          stack.push(n);
        }
      }
    }
    components.push(comp);
  }
  const minArea = minAreaFrac * width * height;
  return components.filter((c) => c.area >= minArea);
}

export const blobDetector: DetectorBackend = {
  id: "blob",
  detect(image, vocabulary) {
    // Largest blobs first so label assignment is stable.
    const blobs = findBlobs(image).sort(
      (a, b) => b.area - a.area || a.y0 - b.y0 || a.x0 - b.x0,
    );
    return blobs.map((blob, i) => {
      const boxArea = (blob.x1 + 1 - blob.x0) * (blob.y1 + 1 - blob.y0);
      const fill = blob.area / boxArea; // solid objects score higher
      return {
        class_label: vocabulary[i % vocabulary.length],
        confidence: Math.min(0.99, Math.max(0.05, 0.4 + 0.55 * fill)),
        box: [blob.x0, blob.y0, blob.x1 + 1, blob.y1 + 1] as [number, number, number, number],
      };
    });
  },
};

const BACKENDS: Record<string, DetectorBackend> = {
  stub: stubDetector,
  blob: blobDetector,
};

export interface DetectorRun {
  doc: DetectionDoc;
  /** backend id -> error message, for backends that failed. */
  errors: Record<string, string>;
}

export function runDetectorList(
  image: DecodedImage,
  imagePath: string,
  backends: DetectorBackend[],
  vocabulary: string[],
): DetectorRun {
  const detections: DetectionEntry[] = [];
  const errors: Record<string, string> = {};
  for (const backend of backends) {
    try {
      for (const entry of backend.detect(image, vocabulary)) {
        if (!(entry.confidence >= 0 && entry.confidence <= 1)) {
          throw new Error(`confidence ${entry.confidence} outside [0, 1]`);
        }
        detections.push({ detector_id: backend.id, ...entry });
      }
    } catch (err) {
      errors[backend.id] = err instanceof Error ? err.message : String(err);
    }
  }
  if (Object.keys(errors).length === backends.length && backends.length > 0) {
    throw new Error(
      `every detector backend failed: ${JSON.stringify(errors)}`,
    );
  }
  return {
    doc: {
      image: { path: imagePath, width: image.width, height: image.height },
      detections,
      masks: {},
    },
    errors,
  };
}

/** Manifest entry point: decode, detect with every enabled backend, write. */
export function runDetectors(manifest: BackendManifest): DetectorRun {
  const image = readPng(manifest.image);
  const vocabulary = loadVocabulary(manifest);
  const backends = manifest.detectors.map((id) => BACKENDS[id]);
  const run = runDetectorList(image, manifest.image, backends, vocabulary);
  writeDetectionDoc(manifest.out.detections, run.doc);
  return run;
}
