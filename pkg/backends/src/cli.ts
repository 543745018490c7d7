#!/usr/bin/env node
/**
 * Backend runner: each subcommand is one backend stage in its own
 * process, sharing nothing with the others beyond the files named in
 * the manifest. `all` chains the three stages for convenience.
 *
 *   scenemark-backends detect  --manifest run.json
 *   scenemark-backends segment --manifest run.json
 *   scenemark-backends depth   --manifest run.json
 *   scenemark-backends all     --manifest run.json
 */

import * as fs from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { loadManifest } from "./manifest.js";
import { runDetectors } from "./detectors.js";
import { runSegmenter } from "./segmenter.js";
import { runDepth } from "./depth.js";
import type { DetectionDoc } from "./interchange.js";

function reportBackendErrors(kind: string, errors: Record<string, string>): void {
  for (const [backend, message] of Object.entries(errors)) {
    console.error(`${kind} ${backend}: ${message}`);
  }
}

function detect(manifestPath: string): void {
  const manifest = loadManifest(manifestPath);
  const run = runDetectors(manifest);
  reportBackendErrors("detector", run.errors);
  console.log(
    `wrote ${manifest.out.detections}: ${run.doc.detections.length} detections ` +
      `from ${new Set(run.doc.detections.map((d) => d.detector_id)).size} backend(s)`,
  );
}

function segment(manifestPath: string): void {
  const manifest = loadManifest(manifestPath);
  const doc = JSON.parse(
    fs.readFileSync(manifest.out.detections, "utf-8"),
  ) as DetectionDoc;
  const run = runSegmenter(manifest, doc);
  reportBackendErrors("segmenter box", run.errors);
  console.log(
    `wrote ${manifest.out.detections}: ${Object.keys(run.doc.masks).length} mask(s)`,
  );
}

function depth(manifestPath: string): void {
  const manifest = loadManifest(manifestPath);
  const dims = runDepth(manifest);
  console.log(`wrote ${manifest.out.depth}: ${dims.width}x${dims.height} 16-bit PGM`);
}

async function main(): Promise<void> {
  const manifestOption = {
    manifest: {
      type: "string",
      demandOption: true,
      describe: "run manifest JSON",
    },
  } as const;
  await yargs(hideBin(process.argv))
    .scriptName("scenemark-backends")
    .command(
      "detect",
      "run the enabled detector backends",
      manifestOption,
      (argv) => detect(argv.manifest),
    )
    .command(
      "segment",
      "attach masks to an existing detections file",
      manifestOption,
      (argv) => segment(argv.manifest),
    )
    .command(
      "depth",
      "estimate relative depth and write the PGM",
      manifestOption,
      (argv) => depth(argv.manifest),
    )
    .command("all", "detect, then segment, then depth", manifestOption, (argv) => {
      detect(argv.manifest);
      segment(argv.manifest);
      depth(argv.manifest);
    })
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      console.error(err ? `error: ${err.message}` : msg);
      process.exit(1);
    })
    .parseAsync();
}

main().catch((err) => {
  console.error(`error: ${err instanceof Error ? err.message : err}`);
  process.exit(1);
});
