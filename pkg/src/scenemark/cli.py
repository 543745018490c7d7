"""Command-line entry points: annotate, eval-rec, batch."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .config import (
    DEDUP_SCOPES,
    DISTANCE_MODES,
    ID_STYLES,
    NEAR_METRICS,
    SCORE_MODES,
    PipelineConfig,
    apply_overrides,
    load_config,
)
from .errors import PipelineError, ValidationError
from .geometry import BoundingBox, iou
from .pipeline import AnnotateRequest, StageFailure, annotate

REC_IOU_THRESHOLD = 0.9

_THRESHOLD_KEYS = (
    "tau_od_min_conf", "tau_overlap_iou", "tau_dir_margin", "tau_z_diff",
    "tau_near", "tau_touch_iou", "tau_touch_gap", "tau_v_close", "tau_close",
    "tau_query_obj", "reference_frame_size",
)


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("pipeline configuration")
    group.add_argument("--config", metavar="PATH",
                       help="flat key = value config file; flags override it")
    for key in _THRESHOLD_KEYS:
        group.add_argument(f"--{key.replace('_', '-')}", dest=key,
                           metavar="X", help=f"override {key}")
    group.add_argument("--k", dest="k", metavar="N",
                       help="max relations kept per head object")
    group.add_argument("--id-style", choices=ID_STYLES, dest="id_style")
    group.add_argument("--relation-labels", choices=("on", "off"),
                       dest="relation_labels",
                       help="draw relation label boxes on edges")
    group.add_argument("--prompt-mode", choices=("visual", "visual-textual"),
                       dest="prompt_mode")
    group.add_argument("--distance-mode", choices=DISTANCE_MODES,
                       dest="distance_mode")
    group.add_argument("--near-metric", choices=NEAR_METRICS, dest="near_metric")
    group.add_argument("--score-mode", choices=SCORE_MODES, dest="score_mode")
    group.add_argument("--dedup-scope", choices=DEDUP_SCOPES, dest="dedup_scope")


def _config_from_args(args: argparse.Namespace) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides: dict[str, str] = {}
    for key in (*_THRESHOLD_KEYS, "k", "id_style", "distance_mode",
                "near_metric", "score_mode", "dedup_scope"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "relation_labels", None) is not None:
        overrides["render_relation_labels"] = (
            "true" if args.relation_labels == "on" else "false")
    if getattr(args, "prompt_mode", None) is not None:
        overrides["prompt_mode"] = args.prompt_mode.replace("-", "_")
    return apply_overrides(cfg, overrides) if overrides else cfg


def _add_lexicon_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("query matching resources")
    group.add_argument("--synonyms", metavar="PATH",
                       help="object synonym lexicon JSON (default: bundled)")
    group.add_argument("--relation-lexicon", metavar="PATH",
                       help="relation trigger lexicon JSON (default: bundled)")
    group.add_argument("--vectors", metavar="PATH",
                       help="word vector table (default: lexical matching only)")


def _request_from_args(args: argparse.Namespace, row: dict | None = None,
                       out_dir: str | None = None) -> AnnotateRequest:
    src = row or {
        "image": args.image, "detections": args.detections,
        "depth": args.depth, "query": args.query,
    }
    for key in ("image", "detections", "query"):
        if not src.get(key):
            raise ValidationError("missing required field", field=key)
    return AnnotateRequest(
        image_path=src["image"],
        detections_path=src["detections"],
        depth_path=src.get("depth"),
        query=src["query"],
        out_dir=out_dir if out_dir is not None else args.out,
        config=_config_from_args(args),
        synonyms_path=args.synonyms,
        relation_lexicon_path=args.relation_lexicon,
        vectors_path=args.vectors,
    )


def cmd_annotate(args: argparse.Namespace) -> int:
    try:
        outcome = annotate(_request_from_args(args))
    except StageFailure as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1
    except PipelineError as exc:
        print(f"error [setup] {exc}", file=sys.stderr)
        return 1
    for note in outcome.warnings:
        print(f"warning: {note}", file=sys.stderr)
    sg = outcome.scene_graph
    print(f"annotated {len(sg.objects)} objects, {len(sg.relations)} relations "
          f"-> {outcome.artifacts['image']}")
    return 0


def _load_json(path: str, what: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(str(exc), field=what) from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc}", field=what) from exc


def _region_lookup(graph_doc: dict) -> dict[str, BoundingBox]:
    regions: dict[str, BoundingBox] = {}
    for node in graph_doc.get("nodes", ()):
        if node.get("id") is None or "box" not in node:
            raise ValidationError("node missing id or box", field="nodes")
        regions[str(node["id"])] = BoundingBox(*node["box"])
    return regions


def eval_rec(predictions: list, graph_docs: list[dict],
             ground_truth: list) -> dict:
    """Score mark-ID predictions against ground-truth boxes.

    A prediction is correct when the predicted mark's region overlaps the
    ground-truth box with IoU >= 0.9; unknown IDs count as wrong and are
    flagged rather than skipped.
    """
    if not (len(predictions) == len(graph_docs) == len(ground_truth)):
        raise ValidationError(
            f"length mismatch: {len(predictions)} predictions, "
            f"{len(graph_docs)} graphs, {len(ground_truth)} boxes",
            field="predictions")
    items = []
    for i, (pred, doc, gt) in enumerate(zip(predictions, graph_docs,
                                            ground_truth)):
        regions = _region_lookup(doc)
        gt_box = BoundingBox(*gt)
        region = regions.get(str(pred))
        if region is None:
            items.append({"index": i, "mark_id": str(pred), "known": False,
                          "iou": 0.0, "correct": False})
            continue
        score = iou(region, gt_box)
        items.append({"index": i, "mark_id": str(pred), "known": True,
                      "iou": score, "correct": score >= REC_IOU_THRESHOLD})
    correct = sum(1 for it in items if it["correct"])
    accuracy = correct / len(items) if items else 0.0
    return {"items": items, "evaluated": len(items), "correct": correct,
            "accuracy": accuracy}


def cmd_eval_rec(args: argparse.Namespace) -> int:
    try:
        predictions = _load_json(args.predictions, "predictions")
        ground_truth = _load_json(args.ground_truth, "ground_truth")
        graph_docs = [_load_json(p, "graph") for p in args.graphs]
        report = eval_rec(predictions, graph_docs, ground_truth)
    except PipelineError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1
    for item in report["items"]:
        verdict = "correct" if item["correct"] else "incorrect"
        flag = "" if item["known"] else " (unknown mark id)"
        print(f"item {item['index']}: {item['mark_id']} iou={item['iou']:.4f} "
              f"{verdict}{flag}")
    print(f"accuracy {report['correct']}/{report['evaluated']} = "
          f"{report['accuracy']:.4f}")
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n",
                                  encoding="utf-8")
    return 0


def _parse_manifest(path: str) -> list[dict]:
    rows = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(str(exc), field="manifest") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"line {lineno}: {exc}", field="manifest") from exc
        if not isinstance(row, dict):
            raise ValidationError(f"line {lineno}: expected an object",
                                  field="manifest")
        rows.append(row)
    return rows


def cmd_batch(args: argparse.Namespace) -> int:
    try:
        rows = _parse_manifest(args.manifest)
        _config_from_args(args)  # surface config errors before any work
    except PipelineError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1

    root = Path(args.out)

    def _run_row(index_row):
        index, row = index_row
        out_dir = row.get("out") or str(root / f"row_{index:04d}")
        entry = {"index": index, "out": out_dir}
        try:
            outcome = annotate(_request_from_args(args, row=row, out_dir=out_dir))
        except Exception as exc:  # noqa: BLE001 - row isolation by contract
            entry.update(status="error", error=str(exc))
            return entry
        entry.update(status="ok", timings=outcome.timings,
                     warnings=outcome.warnings)
        return entry

    if args.workers > 1 and len(rows) > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            entries = list(pool.map(_run_row, enumerate(rows)))
    else:
        entries = [_run_row(ir) for ir in enumerate(rows)]

    failed = [e for e in entries if e["status"] == "error"]
    summary = {"rows": entries, "ok": len(entries) - len(failed),
               "failed": len(failed)}
    root.mkdir(parents=True, exist_ok=True)
    summary_path = root / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2) + "\n",
                            encoding="utf-8")
    for e in failed:
        print(f"row {e['index']} failed: {e['error']}", file=sys.stderr)
    print(f"batch: {summary['ok']} ok, {summary['failed']} failed "
          f"-> {summary_path}")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenemark",
        description="Scene-graph visual prompting: detect-fuse-relate-render.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ann = sub.add_parser("annotate",
                           help="annotate one image and emit prompt artifacts")
    p_ann.add_argument("--image", required=True, help="source image (PNG/JPEG)")
    p_ann.add_argument("--detections", required=True,
                       help="detections JSON from the detector backends")
    p_ann.add_argument("--depth", help="16-bit PGM relative depth map")
    p_ann.add_argument("--query", required=True, help="natural-language question")
    p_ann.add_argument("--out", required=True, help="output directory")
    _add_config_flags(p_ann)
    _add_lexicon_flags(p_ann)
    p_ann.set_defaults(func=cmd_annotate)

    p_rec = sub.add_parser("eval-rec",
                           help="score predicted mark IDs against ground truth")
    p_rec.add_argument("--predictions", required=True,
                       help="JSON array of predicted mark IDs")
    p_rec.add_argument("--graphs", required=True, nargs="+",
                       help="scene_graph.json per prediction, in order")
    p_rec.add_argument("--ground-truth", required=True,
                       help="JSON array of [x0,y0,x1,y1] boxes")
    p_rec.add_argument("--out", help="write the JSON report here")
    p_rec.set_defaults(func=cmd_eval_rec)

    p_bat = sub.add_parser("batch", help="annotate every row of a manifest")
    p_bat.add_argument("--manifest", required=True,
                       help="JSON-lines file of annotate requests")
    p_bat.add_argument("--out", required=True, help="output root directory")
    p_bat.add_argument("--workers", type=int, default=1,
                       help="concurrent rows (default 1)")
    _add_config_flags(p_bat)
    _add_lexicon_flags(p_bat)
    p_bat.set_defaults(func=cmd_batch)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
