#!/usr/bin/env python3
"""Time the post-detection stages across image sizes and object counts.

Objects are laid out on a jittered grid so fusion keeps them distinct,
every query misses so filtering keeps the whole graph, and the reported
edge count is whatever the per-head budget leaves. Times are per-stage
medians over --repeats runs (plus one warm-up for font/template caches).

Usage:
    python3 scripts/benchmark.py [--repeats 5] [--json PATH]
"""

from __future__ import annotations

import argparse
import json
import statistics
import time

import numpy as np
from PIL import Image

from scenemark.config import PipelineConfig
from scenemark.filtering import (
    RelationLexicon,
    SynonymLexicon,
    WordVectorTable,
    filter_scene,
)
from scenemark.fusion import DetectionFile, RawDetection, fuse_detections
from scenemark.geometry import BoundingBox
from scenemark.prompting import assign_ids, build_prompt, verbalize_scene_graph
from scenemark.relations import build_relation_set
from scenemark.render import render_scene
from scenemark.types import DepthMap, SceneGraph

CLASSES = ("chair", "table", "lamp", "sofa", "plant")
GRID_COLS = 5
STAGES = ("fusion", "relations", "filtering", "render", "prompt")


def build_inputs(dims: tuple[int, int], n_objects: int):
    width, height = dims
    rows = -(-n_objects // GRID_COLS)
    cell_w, cell_h = width // GRID_COLS, height // rows
    detections = []
    depth = np.tile(np.linspace(0.15, 0.85, height)[:, None], (1, width))
    for i in range(n_objects):
        col, row = i % GRID_COLS, i // GRID_COLS
        x0 = col * cell_w + cell_w // 6
        y0 = row * cell_h + cell_h // 6
        box = (x0, y0, x0 + cell_w * 2 // 3, y0 + cell_h * 2 // 3)
        detections.append(RawDetection(
            detector_id="bench", class_label=CLASSES[i % len(CLASSES)],
            confidence=0.9, box=BoundingBox(*box), source_index=i))
    det_file = DetectionFile(image_path="bench.png", image_width=width,
                             image_height=height,
                             detections=tuple(detections), masks={})
    depth_map = DepthMap(width=width, height=height, values=depth)
    image = Image.new("RGB", dims, (128, 128, 128))
    return det_file, depth_map, image


def run_once(det_file, depth_map, image, dims, cfg, lexicons) -> dict:
    synonyms, relation_lexicon, vectors = lexicons
    query = "summarize the arrangement"
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    objs = fuse_detections(det_file, cfg)
    timings["fusion"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    rels = build_relation_set(objs, depth_map, cfg, dims)
    timings["relations"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sg, _ = filter_scene(objs, rels, query, synonyms, relation_lexicon,
                         vectors, cfg)
    timings["filtering"] = time.perf_counter() - t0

    sg = SceneGraph(objects=assign_ids(sg.objects), relations=sg.relations)

    t0 = time.perf_counter()
    render_scene(image, sg, cfg)
    timings["render"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    build_prompt("visual_textual", query, verbalize_scene_graph(sg),
                 "bench.png")
    timings["prompt"] = time.perf_counter() - t0

    timings["n_edges"] = len(sg.relations)
    return timings


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--json", help="also dump raw results to this path")
    args = parser.parse_args()

    cfg = PipelineConfig()
    lexicons = (SynonymLexicon.load_default(), RelationLexicon.load_default(),
                WordVectorTable.empty())
    grid = [((640, 480), 10), ((1024, 768), 20), ((1920, 1080), 20),
            ((1024, 768), 40)]

    header = (f"{'size':>11} {'objs':>5} {'edges':>6} "
              + " ".join(f"{s:>10}" for s in STAGES) + f" {'total':>10}")
    print(header)
    print("-" * len(header))
    results = []
    for dims, n_objects in grid:
        inputs = build_inputs(dims, n_objects)
        run_once(*inputs, dims, cfg, lexicons)  # warm-up
        samples = [run_once(*inputs, dims, cfg, lexicons)
                   for _ in range(args.repeats)]
        med = {s: statistics.median(x[s] for x in samples) for s in STAGES}
        total = sum(med.values())
        row = {"dims": list(dims), "objects": n_objects,
               "edges": samples[0]["n_edges"],
               **{s: med[s] for s in STAGES}, "total": total}
        results.append(row)
        print(f"{dims[0]}x{dims[1]:<6} {n_objects:>5} {row['edges']:>6} "
              + " ".join(f"{med[s] * 1000:>8.1f}ms" for s in STAGES)
              + f" {total * 1000:>8.1f}ms")

    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(results, fh, indent=2)
        print(f"\nwrote {args.json}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
