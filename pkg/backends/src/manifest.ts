/**
 * Run manifest: which image to process, which backends to enable, and
 * where the interchange files land. Validation is strict so a typo'd
 * manifest fails loudly before any work starts.
 */

import * as fs from "node:fs";
import { z } from "zod";

export const DETECTOR_IDS = ["stub", "blob"] as const;
export const SEGMENTER_IDS = ["stub", "threshold"] as const;

const manifestSchema = z.object({
  image: z.string().min(1),
  detectors: z
    .array(z.enum(DETECTOR_IDS))
    .min(1, "at least one detector backend must be enabled"),
  segmenter: z.enum(SEGMENTER_IDS).optional(),
  device: z.string().default("cpu"),
  /** Optional JSON file with an array of class labels for the detectors. */
  vocabulary: z.string().optional(),
  out: z.object({
    detections: z.string().min(1),
    depth: z.string().min(1),
  }),
});

export type BackendManifest = z.infer<typeof manifestSchema>;

export function parseManifest(raw: unknown): BackendManifest {
  const result = manifestSchema.safeParse(raw);
  if (!result.success) {
    const issues = result.error.issues
      .map((i) => `${i.path.join(".") || "<root>"}: ${i.message}`)
      .join("; ");
    throw new Error(`invalid manifest: ${issues}`);
  }
  return result.data;
}

export function loadManifest(filePath: string): BackendManifest {
  return parseManifest(JSON.parse(fs.readFileSync(filePath, "utf-8")));
}

const DEFAULT_VOCABULARY = ["object"];

export function loadVocabulary(manifest: BackendManifest): string[] {
  if (!manifest.vocabulary) return DEFAULT_VOCABULARY;
  const doc = JSON.parse(fs.readFileSync(manifest.vocabulary, "utf-8"));
  if (!Array.isArray(doc) || doc.length === 0 || doc.some((v) => typeof v !== "string")) {
    throw new Error(`vocabulary file ${manifest.vocabulary} must be a non-empty JSON array of strings`);
  }
  return doc;
}
