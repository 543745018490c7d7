#!/usr/bin/env python3
"""Build a synthetic scene end to end and annotate it.

Writes a small indoor-style image, detection JSON from three pretend
detectors (with jittered duplicate boxes so fusion has something to do),
elliptical masks for two objects, and a 16-bit depth map; then runs the
full pipeline and reports what landed where.

Usage:
    python3 scripts/make_demo.py [--out-dir out/demo] [--query TEXT]
"""

from __future__ import annotations

import argparse
import json
import random
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw

from scenemark.pgm import dump_depth_pgm
from scenemark.pipeline import AnnotateRequest, annotate
from scenemark.prompting import verbalize_scene_graph
from scenemark.types import DepthMap, RegionMask

WIDTH, HEIGHT = 640, 480

# class label, box, fill color, assigned depth (higher = nearer)
SCENE = [
    ("table", (180, 220, 460, 420), (150, 100, 60), 0.85),
    ("chair", (60, 250, 170, 430), (180, 150, 90), 0.80),
    ("chair", (470, 250, 580, 430), (180, 150, 90), 0.78),
    ("plant", (20, 60, 100, 200), (60, 140, 70), 0.35),
    ("lamp", (540, 40, 610, 190), (220, 210, 120), 0.30),
]


def draw_image(path: Path) -> None:
    img = Image.new("RGB", (WIDTH, HEIGHT), (235, 230, 220))
    draw = ImageDraw.Draw(img)
    draw.rectangle((0, 300, WIDTH, HEIGHT), fill=(205, 190, 170))  # floor
    for _, box, color, _ in SCENE:
        draw.rectangle(box, fill=color, outline=(40, 40, 40), width=2)
    img.save(path)


def ellipse_mask(box: tuple[int, int, int, int]) -> RegionMask:
    x0, y0, x1, y1 = box
    yy, xx = np.mgrid[0:HEIGHT, 0:WIDTH]
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    rx, ry = (x1 - x0) / 2, (y1 - y0) / 2
    grid = ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    return RegionMask.encode(grid)


def write_detections(path: Path, image_path: str, rng: random.Random) -> None:
    detections = []
    masks = {}
    for label, box, _, _ in SCENE:
        for detector, conf in (("open_vocab", rng.uniform(0.75, 0.95)),
                               ("general", rng.uniform(0.55, 0.85))):
            jitter = [v + rng.uniform(-1.5, 1.5) for v in box]
            detections.append({
                "detector_id": detector,
                "class_label": label,
                "confidence": round(conf, 3),
                "box": [round(v, 1) for v in jitter],
            })
    # One low-confidence stray the gate should drop.
    detections.append({
        "detector_id": "general", "class_label": "dog",
        "confidence": 0.2, "box": [300, 300, 360, 360],
    })
    # Masks ride along with the strongest detection of the two chairs.
    for idx, det in enumerate(detections):
        if det["class_label"] == "chair" and det["detector_id"] == "open_vocab":
            mask = ellipse_mask(tuple(int(v) for v in det["box"]))
            masks[str(idx)] = {"width": WIDTH, "height": HEIGHT,
                               "rle": list(mask.rle)}
    doc = {
        "image": {"path": image_path, "width": WIDTH, "height": HEIGHT},
        "detections": detections,
        "masks": masks,
    }
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def write_depth(path: Path) -> None:
    # Gentle back-to-front gradient with per-object plateaus.
    base = np.tile(np.linspace(0.2, 0.6, HEIGHT)[:, None], (1, WIDTH))
    for _, (x0, y0, x1, y1), _, depth in SCENE:
        base[y0:y1, x0:x1] = depth
    path.write_bytes(dump_depth_pgm(
        DepthMap(width=WIDTH, height=HEIGHT, values=base.astype(np.float64))))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="out/demo")
    parser.add_argument("--query", default="is the plant near the table?")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    image_path = out_dir / "scene.png"
    detections_path = out_dir / "detections.json"
    depth_path = out_dir / "depth.pgm"

    rng = random.Random(args.seed)
    draw_image(image_path)
    write_detections(detections_path, str(image_path), rng)
    write_depth(depth_path)

    outcome = annotate(AnnotateRequest(
        image_path=str(image_path),
        detections_path=str(detections_path),
        depth_path=str(depth_path),
        query=args.query,
        out_dir=str(out_dir),
    ))

    print(f"query: {args.query}")
    print(f"objects kept: {len(outcome.scene_graph.objects)}, "
          f"relations: {len(outcome.scene_graph.relations)}")
    for obj in outcome.scene_graph.objects:
        box = (obj.box.x_min, obj.box.y_min, obj.box.x_max, obj.box.y_max)
        print(f"  {obj.mark_id.textual:10s} conf={obj.confidence:.3f} "
              f"box=({', '.join(f'{v:.1f}' for v in box)})")
    triplets = verbalize_scene_graph(outcome.scene_graph)
    if triplets:
        print("triplets:")
        for line in triplets.splitlines():
            print(f"  {line}")
    print("artifacts:")
    for name, path in outcome.artifacts.items():
        print(f"  {name}: {path}")
    print("stage timings: " + ", ".join(
        f"{stage}={ms * 1000:.1f}ms" for stage, ms in outcome.timings.items()))
    if not outcome.layout_resolved:
        print("warning: layout left unresolved overlaps")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
