"""Detection ingest and same-class box merging.

Detectors from an ensemble each contribute raw boxes through a JSON
interchange file. After the confidence gate, overlapping same-class boxes
are merged into a single confidence-weighted average box (weighted boxes
fusion); masks ride along from the strongest member, with a rectangular
box fallback when no member carries one.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import PipelineConfig
from .errors import ParseError, ValidationError
from .geometry import BoundingBox, clamp_box_to_image, iou
from .types import ObjectInstance, RegionMask

# Mask foreground may exceed the fused box by at most this many pixels.
MASK_BOX_TOLERANCE_PX = 2


@dataclass(frozen=True)
class RawDetection:
    """One detector's box before fusion. ``source_index`` is its position
    in the originating detection file."""

    detector_id: str
    class_label: str
    confidence: float
    box: BoundingBox
    source_index: int = -1

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError("confidence must be in [0, 1]", field="confidence")
        if not self.class_label:
            raise ValidationError("class label must be non-empty", field="class_label")


@dataclass(frozen=True)
class DetectionFile:
    """Parsed interchange file: image metadata, detections, optional masks."""

    image_path: str
    image_width: int
    image_height: int
    detections: tuple[RawDetection, ...]
    masks: dict[int, RegionMask]

    @property
    def image_dims(self) -> tuple[int, int]:
        return (self.image_width, self.image_height)


def _require(obj: dict, key: str, ctx: str):
    if key not in obj:
        raise ValidationError("required key missing", field=f"{ctx}.{key}")
    return obj[key]


def parse_detection_file(data: bytes | str) -> DetectionFile:
    """Parse and validate the detection interchange JSON.

    Boxes overshooting the image rectangle are clamped; entries with
    non-finite numbers are rejected.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", offset=exc.pos) from exc
    if not isinstance(doc, dict):
        raise ValidationError("top-level value must be an object", field="$")

    image = _require(doc, "image", "$")
    if not isinstance(image, dict):
        raise ValidationError("must be an object", field="image")
    path = str(_require(image, "path", "image"))
    width = _require(image, "width", "image")
    height = _require(image, "height", "image")
    if not isinstance(width, int) or not isinstance(height, int) or width <= 0 or height <= 0:
        raise ValidationError("width/height must be positive integers", field="image")

    raw_dets = _require(doc, "detections", "$")
    if not isinstance(raw_dets, list):
        raise ValidationError("must be an array", field="detections")
    detections = []
    for i, entry in enumerate(raw_dets):
        ctx = f"detections[{i}]"
        if not isinstance(entry, dict):
            raise ValidationError("must be an object", field=ctx)
        detector_id = str(_require(entry, "detector_id", ctx))
        class_label = str(_require(entry, "class_label", ctx)).strip().lower()
        confidence = _require(entry, "confidence", ctx)
        box = _require(entry, "box", ctx)
        if not isinstance(confidence, (int, float)) or not math.isfinite(confidence):
            raise ValidationError("must be a finite number", field=f"{ctx}.confidence")
        if not 0.0 <= confidence <= 1.0:
            raise ValidationError("must lie in [0, 1]", field=f"{ctx}.confidence")
        if (not isinstance(box, list) or len(box) != 4
                or not all(isinstance(v, (int, float)) for v in box)):
            raise ValidationError("must be [x_min, y_min, x_max, y_max]", field=f"{ctx}.box")
        try:
            clamped = clamp_box_to_image(tuple(box), (width, height))
        except ValidationError as exc:
            raise ValidationError(str(exc), field=f"{ctx}.box") from exc
        detections.append(RawDetection(detector_id, class_label, float(confidence),
                                       clamped, source_index=i))

    masks: dict[int, RegionMask] = {}
    for key, entry in (doc.get("masks") or {}).items():
        ctx = f"masks[{key}]"
        try:
            index = int(key)
        except ValueError:
            raise ValidationError("key must be a detection index", field=ctx) from None
        if not 0 <= index < len(detections):
            raise ValidationError("index out of range", field=ctx)
        if not isinstance(entry, dict):
            raise ValidationError("must be an object", field=ctx)
        try:
            masks[index] = RegionMask(
                width=int(_require(entry, "width", ctx)),
                height=int(_require(entry, "height", ctx)),
                rle=tuple(int(c) for c in _require(entry, "rle", ctx)),
            )
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad mask encoding: {exc}", field=ctx) from exc

    return DetectionFile(path, width, height, tuple(detections), masks)


def load_detection_file(path) -> DetectionFile:
    with open(path, "rb") as fh:
        return parse_detection_file(fh.read())


def filter_by_confidence(
    dets: Sequence[RawDetection], tau_od_min_conf: float
) -> list[RawDetection]:
    """Keep detections whose confidence meets or exceeds the threshold."""
    return [d for d in dets if d.confidence >= tau_od_min_conf]


def _fused_box(members: list[RawDetection]) -> BoundingBox:
    weights = [m.confidence for m in members]
    total = sum(weights)
    coords = [
        sum(w * getattr(m.box, name) for w, m in zip(weights, members)) / total
        for name in ("x_min", "y_min", "x_max", "y_max")
    ]
    return BoundingBox(*coords)


def _fused_confidence(members: list[RawDetection], score_mode: str) -> float:
    confs = [m.confidence for m in members]
    if score_mode == "weighted_mean":
        return sum(c * c for c in confs) / sum(confs)
    return sum(confs) / len(confs)


def fuse_wbf(
    dets: Sequence[RawDetection],
    tau_overlap_iou: float,
    score_mode: str = "mean",
) -> list[ObjectInstance]:
    """Greedily cluster same-class boxes whose IoU with the running fused
    box exceeds the threshold, then average.

    Detections are pre-sorted by descending confidence (full tie-break on
    class and coordinates) so the greedy pass is deterministic regardless
    of input order. Output is one instance per cluster, strongest first.
    """
    order = sorted(
        dets,
        key=lambda d: (-d.confidence, d.class_label, d.box.x_min, d.box.y_min,
                       d.box.x_max, d.box.y_max, d.detector_id),
    )
    clusters: list[dict] = []
    for det in order:
        joined = False
        for cluster in clusters:
            if cluster["class_label"] != det.class_label:
                continue
            if iou(det.box, cluster["box"]) > tau_overlap_iou:
                cluster["members"].append(det)
                cluster["box"] = _fused_box(cluster["members"])
                joined = True
                break
        if not joined:
            clusters.append({"class_label": det.class_label, "members": [det],
                             "box": det.box})

    objects = [
        ObjectInstance(
            class_label=c["class_label"],
            confidence=_fused_confidence(c["members"], score_mode),
            box=c["box"],
            source_indices=tuple(m.source_index for m in c["members"]),
        )
        for c in clusters
    ]
    objects.sort(key=lambda o: (-o.confidence, o.class_label, o.box.x_min))
    return objects


def attach_masks(
    objects: Sequence[ObjectInstance], detection_file: DetectionFile
) -> list[ObjectInstance]:
    """Give each fused object the mask of its strongest member, or a
    rectangular box mask when no member carries one.

    Masks are intersected with the fused box expanded by
    ``MASK_BOX_TOLERANCE_PX`` so a member mask cannot leak far outside the
    box it now describes.
    """
    w, h = detection_file.image_dims
    by_index = {d.source_index: d for d in detection_file.detections}
    out = []
    for obj in objects:
        candidates = [
            i for i in obj.source_indices
            if i in detection_file.masks and i in by_index
        ]
        if not candidates:
            mask = RegionMask.from_box(obj.box, w, h)
        else:
            best = min(candidates, key=lambda i: (-by_index[i].confidence, i))
            mask = detection_file.masks[best]
            if mask.width != w or mask.height != h:
                raise ValidationError(
                    f"mask is {mask.width}x{mask.height}, image is {w}x{h}",
                    field=f"masks[{best}]",
                )
            mask = _crop_to_box(mask, obj.box)
        out.append(dataclasses.replace(obj, mask=mask))
    return out


def _crop_to_box(mask: RegionMask, box: BoundingBox) -> RegionMask:
    grid = mask.decode()
    x0 = max(0, int(math.floor(box.x_min)) - MASK_BOX_TOLERANCE_PX)
    y0 = max(0, int(math.floor(box.y_min)) - MASK_BOX_TOLERANCE_PX)
    x1 = min(mask.width, int(math.ceil(box.x_max)) + MASK_BOX_TOLERANCE_PX)
    y1 = min(mask.height, int(math.ceil(box.y_max)) + MASK_BOX_TOLERANCE_PX)
    keep = np.zeros_like(grid)
    keep[y0:y1, x0:x1] = grid[y0:y1, x0:x1]
    if not keep.any():
        # Segmenter output landed entirely outside its own box; fall back.
        return RegionMask.from_box(box, mask.width, mask.height)
    if keep.sum() == grid.sum():
        return mask
    return RegionMask.encode(keep)


def fuse_detections(
    detection_file: DetectionFile, cfg: PipelineConfig
) -> list[ObjectInstance]:
    """Confidence gate, fuse, attach masks: the full ingest for one image."""
    kept = filter_by_confidence(detection_file.detections, cfg.tau_od_min_conf)
    objects = fuse_wbf(kept, cfg.tau_overlap_iou, cfg.score_mode)
    return attach_masks(objects, detection_file)
