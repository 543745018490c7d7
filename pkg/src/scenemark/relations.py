"""Pairwise spatial relation estimation.

For every ordered object pair the pipeline tries, in order: a directional
label from the dominant center displacement, a depth-stacking label from
the monocular depth difference, and the ``near`` fallback when no
directional label fired. Directional labels between different-class
objects then receive a closeness modifier.

Triplets read head-relative: ``head --(above)--> tail`` means the head
object is above the tail object, so the displacement is computed as
head center minus tail center.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import PipelineConfig
from .geometry import (
    BoundingBox,
    box_center,
    box_gap,
    center_distance,
    iou,
    normalized_center_distance,
    to_reference_frame,
)
from .types import DepthMap, ObjectInstance, Relation


@dataclass(frozen=True)
class PairGeometry:
    """Everything the relation rules need about one ordered object pair.

    ``dx``/``dy`` and ``box_gap`` are reference-frame units (head minus
    tail); ``d_norm`` is the center distance as a diagonal fraction.
    """

    dx: float
    dy: float
    center_distance_px: float
    d_norm: float
    depth_head: float
    depth_tail: float
    iou: float
    box_gap: float


def _scale_point(p, image_dims, frame: float):
    if frame <= 0:
        return p
    return to_reference_frame(p, image_dims, frame)


def _scale_box(b: BoundingBox, image_dims, frame: float) -> BoundingBox:
    if frame <= 0:
        return b
    x0, y0 = to_reference_frame((b.x_min, b.y_min), image_dims, frame)
    x1, y1 = to_reference_frame((b.x_max, b.y_max), image_dims, frame)
    return BoundingBox(x0, y0, x1, y1)


def compute_pair_geometry(
    head: ObjectInstance,
    tail: ObjectInstance,
    image_dims: tuple[int, int],
    depth_head: float,
    depth_tail: float,
    cfg: PipelineConfig,
) -> PairGeometry:
    frame = cfg.frame_size
    hc = _scale_point(box_center(head.box), image_dims, frame)
    tc = _scale_point(box_center(tail.box), image_dims, frame)
    return PairGeometry(
        dx=hc[0] - tc[0],
        dy=hc[1] - tc[1],
        center_distance_px=center_distance(head.box, tail.box),
        d_norm=normalized_center_distance(head.box, tail.box, image_dims),
        depth_head=depth_head,
        depth_tail=depth_tail,
        iou=iou(head.box, tail.box),
        box_gap=box_gap(
            _scale_box(head.box, image_dims, frame),
            _scale_box(tail.box, image_dims, frame),
        ),
    )


def sample_depth(depth_map: DepthMap, obj: ObjectInstance) -> float:
    """Median of the 3x3 window around the box center, clamped at borders.

    The median shrugs off single-pixel speckle that a point sample would
    propagate into spurious front/behind labels.
    """
    cx, cy = box_center(obj.box)
    px = min(max(int(cx), 0), depth_map.width - 1)
    py = min(max(int(cy), 0), depth_map.height - 1)
    window = depth_map.values[
        max(0, py - 1):min(depth_map.height, py + 2),
        max(0, px - 1):min(depth_map.width, px + 2),
    ]
    return float(np.median(window))


def directional_relation(
    head_index: int,
    tail_index: int,
    geom: PairGeometry,
    cfg: PipelineConfig,
) -> Relation | None:
    """Label from the dominant displacement axis, when it clears the margin."""
    dx, dy = geom.dx, geom.dy
    label = None
    if abs(dy) >= abs(dx) and abs(dy) > cfg.tau_dir_margin:
        label = "above" if dy < 0 else "below"
    elif abs(dx) > cfg.tau_dir_margin:
        label = "left_of" if dx < 0 else "right_of"
    if label is None:
        return None
    return Relation(head_index, tail_index, label,
                    center_distance=geom.center_distance_px)


def depth_relation(
    head_index: int,
    tail_index: int,
    geom: PairGeometry,
    cfg: PipelineConfig,
) -> Relation | None:
    """Front/behind when the depth difference is substantial (strict)."""
    diff = geom.depth_head - geom.depth_tail
    if abs(diff) <= cfg.tau_z_diff:
        return None
    label = "in_front_of" if diff > 0 else "behind"
    return Relation(head_index, tail_index, label,
                    center_distance=geom.center_distance_px)


def proximity_relation(
    head_index: int,
    tail_index: int,
    geom: PairGeometry,
    existing: set[str],
    cfg: PipelineConfig,
) -> Relation | None:
    """``near`` fallback for pairs that got no directional label."""
    if any(label in ("above", "below", "left_of", "right_of") for label in existing):
        return None
    dist_sq = geom.dx * geom.dx + geom.dy * geom.dy
    measure = dist_sq if cfg.near_metric == "squared" else math.sqrt(dist_sq)
    if measure >= cfg.tau_near:
        return None
    return Relation(head_index, tail_index, "near",
                    center_distance=geom.center_distance_px)


def attach_modifier(
    rel: Relation,
    geom: PairGeometry,
    head_class: str,
    tail_class: str,
    cfg: PipelineConfig,
) -> Relation:
    """Closeness qualifier for directional relations between distinct classes.

    The ladder is exclusive and ordered: touching beats very_close beats
    close; a pair matching none stays unqualified.
    """
    if rel.label not in ("above", "below", "left_of", "right_of"):
        return rel
    if head_class == tail_class:
        return rel
    if geom.iou > cfg.tau_touch_iou or geom.box_gap <= cfg.tau_touch_gap:
        return dataclasses.replace(rel, modifier="touching")
    if geom.d_norm < cfg.tau_v_close:
        return dataclasses.replace(rel, modifier="very_close")
    if geom.d_norm < cfg.tau_close:
        return dataclasses.replace(rel, modifier="close")
    return rel


def build_relation_set(
    objects: Sequence[ObjectInstance],
    depth_map: DepthMap | None,
    cfg: PipelineConfig,
    image_dims: tuple[int, int] | None = None,
) -> list[Relation]:
    """Candidate relations over all ordered pairs, in canonical order.

    Pairs are visited in (head_index, tail_index) lexicographic order and
    each pair's labels come out directional, depth, near. Without a depth
    map the depth group is skipped entirely.
    """
    if image_dims is None:
        if depth_map is not None:
            image_dims = (depth_map.width, depth_map.height)
        else:
            w = max(int(math.ceil(o.box.x_max)) for o in objects) if objects else 1
            h = max(int(math.ceil(o.box.y_max)) for o in objects) if objects else 1
            image_dims = (max(w, 1), max(h, 1))

    depths = [
        sample_depth(depth_map, o) if depth_map is not None else 0.0 for o in objects
    ]
    relations: list[Relation] = []
    for i, head in enumerate(objects):
        for j, tail in enumerate(objects):
            if i == j:
                continue
            geom = compute_pair_geometry(head, tail, image_dims,
                                         depths[i], depths[j], cfg)
            labels: set[str] = set()
            rel_dir = directional_relation(i, j, geom, cfg)
            if rel_dir is not None:
                rel_dir = attach_modifier(rel_dir, geom, head.class_label,
                                          tail.class_label, cfg)
                relations.append(rel_dir)
                labels.add(rel_dir.label)
            if depth_map is not None:
                rel_depth = depth_relation(i, j, geom, cfg)
                if rel_depth is not None:
                    relations.append(rel_depth)
                    labels.add(rel_depth.label)
            rel_near = proximity_relation(i, j, geom, labels, cfg)
            if rel_near is not None:
                relations.append(rel_near)
    return relations
