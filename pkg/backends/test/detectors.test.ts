import { describe, expect, it } from "vitest";
import type { DetectorBackend } from "../src/detectors";
import {
  blobDetector,
  findBlobs,
  otsuThreshold,
  runDetectorList,
  stubDetector,
} from "../src/detectors";
import { paintImage, rectScene } from "./helpers";

const VOCAB = ["chair", "table", "lamp"];

describe("stubDetector", () => {
  it("emits one fixed centered box with the first vocabulary label", () => {
    const image = paintImage(100, 80, () => [128, 128, 128]);
    const dets = stubDetector.detect(image, VOCAB);
    expect(dets).toEqual([
      { class_label: "chair", confidence: 0.9, box: [30, 24, 70, 56] },
    ]);
  });
});

describe("otsuThreshold", () => {
  it("separates a two-level histogram between the levels", () => {
    const luma = Float64Array.from([
      ...Array.from({ length: 60 }, () => 40),
      ...Array.from({ length: 40 }, () => 220),
    ]);
    const t = otsuThreshold(luma);
    expect(t).toBeGreaterThanOrEqual(40);
    expect(t).toBeLessThan(220);
  });
});

describe("findBlobs / blobDetector", () => {
  it("recovers axis-aligned rectangles exactly", () => {
    const image = rectScene(120, 90, [
      [10, 10, 40, 50],
      [70, 20, 110, 80],
    ]);
    const dets = blobDetector.detect(image, VOCAB);
    expect(dets.map((d) => d.box)).toEqual([
      [70, 20, 110, 80], // larger blob first
      [10, 10, 40, 50],
    ]);
    for (const det of dets) {
      expect(det.confidence).toBeGreaterThan(0);
      expect(det.confidence).toBeLessThanOrEqual(1);
    }
    expect(dets.map((d) => d.class_label)).toEqual(["chair", "table"]);
  });

  it("finds nothing in a constant image", () => {
    const image = paintImage(64, 64, () => [200, 200, 200]);
    expect(blobDetector.detect(image, VOCAB)).toEqual([]);
  });

  it("drops specks below the area floor", () => {
    const image = rectScene(100, 100, [[50, 50, 52, 52]]); // 4 px blob
    expect(findBlobs(image)).toEqual([]);
  });
});

describe("runDetectorList", () => {
  const scene = rectScene(120, 90, [[10, 10, 40, 50]]);

  it("tags every detection with its backend and builds the doc", () => {
    const run = runDetectorList(scene, "scene.png", [stubDetector, blobDetector], VOCAB);
    expect(run.errors).toEqual({});
    expect(run.doc.image).toEqual({ path: "scene.png", width: 120, height: 90 });
    const ids = new Set(run.doc.detections.map((d) => d.detector_id));
    expect(ids).toEqual(new Set(["stub", "blob"]));
    expect(run.doc.masks).toEqual({});
  });

  it("keeps going when one backend fails", () => {
    const broken: DetectorBackend = {
      id: "broken",
      detect() {
        throw new Error("model load failure");
      },
    };
    const run = runDetectorList(scene, "scene.png", [broken, stubDetector], VOCAB);
    expect(run.errors).toEqual({ broken: "model load failure" });
    expect(run.doc.detections.map((d) => d.detector_id)).toEqual(["stub"]);
  });

  it("throws only when every backend fails", () => {
    const broken: DetectorBackend = {
      id: "broken",
      detect() {
        throw new Error("no weights");
      },
    };
    expect(() => runDetectorList(scene, "scene.png", [broken], VOCAB)).toThrow(
      /every detector backend failed/,
    );
  });

  it("rejects confidences outside [0, 1] from a backend", () => {
    const wild: DetectorBackend = {
      id: "wild",
      detect() {
        return [{ class_label: "x", confidence: 1.5, box: [0, 0, 1, 1] }];
      },
    };
    const run = runDetectorList(scene, "scene.png", [wild, stubDetector], VOCAB);
    expect(run.errors.wild).toMatch(/outside \[0, 1\]/);
    expect(run.doc.detections).toHaveLength(1);
  });

  it("a constant image with only blob enabled still yields a valid empty doc", () => {
    const flat = paintImage(64, 64, () => [180, 180, 180]);
    const run = runDetectorList(flat, "flat.png", [blobDetector], VOCAB);
    expect(run.doc.detections).toEqual([]);
    expect(run.errors).toEqual({});
  });
});
