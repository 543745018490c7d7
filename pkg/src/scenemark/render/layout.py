"""Mark geometry: where every overlay element goes, and collision repair.

Placement happens in a fixed order (edge labels, then ID boxes, then
arrows) because the resolver gives earlier marks precedence: the visually
intrusive relation labels claim their midpoints first and everything else
yields. Collision rectangles exist only for boxed marks; mask fills and
arrow strokes are intangible.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass, field
from typing import Literal, NamedTuple, Sequence

import numpy as np

from ..config import PipelineConfig, RenderStyle
from ..errors import RenderError
from ..geometry import BoundingBox, box_center
from ..types import MarkId, ObjectInstance, SceneGraph
from .fonts import load_font, text_extent
from .palette import RGB, class_color

Rect = tuple[float, float, float, float]
Point = tuple[float, float]
MarkKind = Literal["mask", "id_box", "arrow", "edge_label", "dashed_guide"]

MIN_IMAGE_DIM_PX = 64
_EXTERIOR_GAP_PX = 2.0
_ARROW_ENDPOINT_MARGIN_PX = 4.0


@dataclass
class MarkPlacement:
    kind: MarkKind
    anchor: Point
    owner: tuple[str, int]
    color: RGB
    rect: Rect | None = None
    text: str | None = None
    points: tuple[Point, ...] = field(default_factory=tuple)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "rect": list(self.rect) if self.rect is not None else None,
            "anchor": list(self.anchor),
            "owner": {"type": self.owner[0], "index": self.owner[1]},
            "color": list(self.color),
            "text": self.text,
            "points": [list(p) for p in self.points] or None,
        }


class ResolvedLayout(NamedTuple):
    placements: list[MarkPlacement]
    resolved: bool


class UnresolvedLayoutWarning(RuntimeWarning):
    """The collision resolver hit its iteration cap with overlaps left."""


def rect_center(rect: Rect) -> Point:
    return ((rect[0] + rect[2]) / 2.0, (rect[1] + rect[3]) / 2.0)


def rect_at(center: Point, width: float, height: float) -> Rect:
    cx, cy = center
    return (cx - width / 2.0, cy - height / 2.0,
            cx + width / 2.0, cy + height / 2.0)


def rects_overlap(a: Rect, b: Rect) -> bool:
    """True for positive-area intersection; mere edge contact is fine."""
    return (min(a[2], b[2]) - max(a[0], b[0]) > 0
            and min(a[3], b[3]) - max(a[1], b[1]) > 0)


def clamp_rect(rect: Rect, image_dims: tuple[int, int]) -> Rect:
    w, h = image_dims
    dx = dy = 0.0
    if rect[0] < 0:
        dx = -rect[0]
    elif rect[2] > w:
        dx = w - rect[2]
    if rect[1] < 0:
        dy = -rect[1]
    elif rect[3] > h:
        dy = h - rect[3]
    return (rect[0] + dx, rect[1] + dy, rect[2] + dx, rect[3] + dy)


def object_center(obj: ObjectInstance) -> Point:
    """Mask centroid (mean of foreground pixel centers); box center when the
    object only has its rectangular footprint."""
    if obj.mask is not None:
        grid = obj.mask.decode()
        rows, cols = np.nonzero(grid)
        if rows.size:
            return (float(cols.mean()) + 0.5, float(rows.mean()) + 0.5)
    return box_center(obj.box)


def _mark_text_rect(text: str, center: Point, font, padding: int) -> Rect:
    x0, y0, x1, y1 = text_extent(text, font)
    return rect_at(center, (x1 - x0) + 2 * padding, (y1 - y0) + 2 * padding)


def _mark_id_for(obj: ObjectInstance, index: int) -> MarkId:
    return obj.mark_id if obj.mark_id is not None else MarkId(index + 1, obj.class_label)


def _boundary_distance(origin: Point, direction: Point, box: BoundingBox) -> float:
    """Distance along ``direction`` (unit) from ``origin`` to the box edge;
    0 when the ray exits immediately or the origin sits outside."""
    best = math.inf
    ox, oy = origin
    dx, dy = direction
    if dx > 0:
        best = min(best, (box.x_max - ox) / dx)
    elif dx < 0:
        best = min(best, (box.x_min - ox) / dx)
    if dy > 0:
        best = min(best, (box.y_max - oy) / dy)
    elif dy < 0:
        best = min(best, (box.y_min - oy) / dy)
    return max(0.0, best if math.isfinite(best) else 0.0)


def _angular_separation_deg(a: float, b: float) -> float:
    diff = abs(a - b) % 360.0
    return min(diff, 360.0 - diff)


def _place_id_box(
    obj: ObjectInstance,
    center: Point,
    size: tuple[float, float],
    image_dims: tuple[int, int],
    occupied: Sequence[Rect],
) -> Rect:
    width, height = size
    box = obj.box
    if width <= box.width and height <= box.height:
        # Fits inside the object: stay centered on the centroid, nudged the
        # minimum amount needed to sit fully within the box.
        cx = min(max(center[0], box.x_min + width / 2), box.x_max - width / 2)
        cy = min(max(center[1], box.y_min + height / 2), box.y_max - height / 2)
        return clamp_rect(rect_at((cx, cy), width, height), image_dims)

    gap_x = width / 2 + _EXTERIOR_GAP_PX
    gap_y = height / 2 + _EXTERIOR_GAP_PX
    cx, cy = box_center(box)
    candidates = [
        (cx, box.y_min - gap_y),
        (cx, box.y_max + gap_y),
        (box.x_min - gap_x, cy),
        (box.x_max + gap_x, cy),
        (box.x_min - gap_x, box.y_min - gap_y),
        (box.x_max + gap_x, box.y_min - gap_y),
        (box.x_min - gap_x, box.y_max + gap_y),
        (box.x_max + gap_x, box.y_max + gap_y),
    ]
    rects = [clamp_rect(rect_at(c, width, height), image_dims) for c in candidates]
    order = sorted(
        range(len(rects)),
        key=lambda i: math.dist(rect_center(rects[i]), center),
    )
    for i in order:
        if not any(rects_overlap(rects[i], r) for r in occupied):
            return rects[i]
    return rects[order[0]]


def layout_marks(
    image_dims: tuple[int, int],
    scene_graph: SceneGraph,
    cfg: PipelineConfig,
) -> list[MarkPlacement]:
    if min(image_dims) < MIN_IMAGE_DIM_PX:
        raise RenderError(
            f"image {image_dims[0]}x{image_dims[1]} is below the "
            f"{MIN_IMAGE_DIM_PX} px minimum for mark placement")

    style = cfg.style
    font = load_font(style.font_size_for(image_dims))
    objects = scene_graph.objects
    centers = [object_center(o) for o in objects]
    colors = [class_color(o.class_label, style.palette_seed) for o in objects]

    placements: list[MarkPlacement] = [
        MarkPlacement(kind="mask", anchor=centers[i], owner=("object", i),
                      color=colors[i])
        for i in range(len(objects))
    ]

    if cfg.render_relation_labels:
        for ridx, rel in enumerate(scene_graph.relations):
            head_c, tail_c = centers[rel.head_index], centers[rel.tail_index]
            midpoint = ((head_c[0] + tail_c[0]) / 2.0, (head_c[1] + tail_c[1]) / 2.0)
            rect = clamp_rect(
                _mark_text_rect(rel.qualified_label, midpoint, font,
                                style.label_padding_px),
                image_dims)
            placements.append(MarkPlacement(
                kind="edge_label", anchor=midpoint, owner=("relation", ridx),
                color=colors[rel.head_index], rect=rect,
                text=rel.qualified_label))

    id_rects: list[Rect] = []
    for i, obj in enumerate(objects):
        text = _mark_id_for(obj, i).render(cfg.id_style)
        x0, y0, x1, y1 = text_extent(text, font)
        size = ((x1 - x0) + 2 * style.label_padding_px,
                (y1 - y0) + 2 * style.label_padding_px)
        occupied = [p.rect for p in placements if p.rect is not None]
        rect = _place_id_box(obj, centers[i], size, image_dims, occupied)
        id_rects.append(rect)
        placements.append(MarkPlacement(
            kind="id_box", anchor=centers[i], owner=("object", i),
            color=colors[i], rect=rect, text=text))

    # Arrows: quadratic curves clear of both endpoints' boxes and ID marks.
    chord_angles: dict[int, list[float]] = {}
    for ridx, rel in enumerate(scene_graph.relations):
        head_c, tail_c = centers[rel.head_index], centers[rel.tail_index]
        chord = (tail_c[0] - head_c[0], tail_c[1] - head_c[1])
        length = math.hypot(*chord)
        if length == 0.0:
            continue
        direction = (chord[0] / length, chord[1] / length)

        def _half_extent(rect: Rect) -> float:
            return max(rect[2] - rect[0], rect[3] - rect[1]) / 2.0

        start_s = (_boundary_distance(head_c, direction, objects[rel.head_index].box)
                   + _half_extent(id_rects[rel.head_index])
                   + _ARROW_ENDPOINT_MARGIN_PX)
        back = (_boundary_distance(tail_c, (-direction[0], -direction[1]),
                                   objects[rel.tail_index].box)
                + _half_extent(id_rects[rel.tail_index])
                + _ARROW_ENDPOINT_MARGIN_PX)
        end_s = length - back
        if end_s <= start_s:
            # Boxes overlap or nearly touch: degrade to a stubby midpoint
            # arrow rather than an inverted curve.
            start_s, end_s = 0.4 * length, 0.6 * length

        angle = math.degrees(math.atan2(direction[1], direction[0]))
        siblings = chord_angles.setdefault(rel.head_index, [])
        crowded = sum(
            1 for prev in siblings
            if _angular_separation_deg(prev, angle) < style.curve_angle_threshold_deg
        )
        siblings.append(angle)
        offset = style.curve_base_offset_px + crowded * style.curve_step_px

        start = (head_c[0] + direction[0] * start_s, head_c[1] + direction[1] * start_s)
        end = (head_c[0] + direction[0] * end_s, head_c[1] + direction[1] * end_s)
        mid = ((start[0] + end[0]) / 2.0, (start[1] + end[1]) / 2.0)
        perp = (-direction[1], direction[0])
        control = (mid[0] + perp[0] * offset, mid[1] + perp[1] * offset)
        placements.append(MarkPlacement(
            kind="arrow", anchor=mid, owner=("relation", ridx),
            color=colors[rel.head_index], points=(start, control, end)))

    return placements


_KIND_PRIORITY = {"edge_label": 0, "id_box": 1}


def _overlap_extents(a: Rect, b: Rect) -> tuple[float, float]:
    return (min(a[2], b[2]) - max(a[0], b[0]),
            min(a[3], b[3]) - max(a[1], b[1]))


_RELOCATE_AFTER_REVISITS = 4
_RELOCATE_GRID_PX = 8.0


def _nearest_free_rect(
    size: tuple[float, float],
    anchor: Point,
    obstacles: Sequence[Rect],
    image_dims: tuple[int, int],
) -> Rect | None:
    """First in-bounds spot on a coarse grid where a ``size`` rect clears
    every obstacle, closest to ``anchor`` first; None when the image is
    too crowded to hold one."""
    width, height = size
    w, h = image_dims
    if width > w or height > h:
        return None
    xs = list(np.arange(0.0, w - width, _RELOCATE_GRID_PX)) + [w - width]
    ys = list(np.arange(0.0, h - height, _RELOCATE_GRID_PX)) + [h - height]
    spots = sorted(
        ((x, y) for x in xs for y in ys),
        key=lambda s: math.dist((s[0] + width / 2, s[1] + height / 2), anchor),
    )
    for x, y in spots:
        cand = (x, y, x + width, y + height)
        if not any(rects_overlap(cand, obs) for obs in obstacles):
            return cand
    return None


def resolve_collisions(
    placements: Sequence[MarkPlacement],
    image_dims: tuple[int, int],
    style: RenderStyle,
) -> ResolvedLayout:
    """Iteratively separate overlapping boxed marks, then hang dashed guides
    off any edge label that ended up away from its midpoint."""
    out = [dataclasses.replace(p) for p in placements]
    solid = [i for i, p in enumerate(out) if p.rect is not None]

    seen: dict[tuple[Rect, ...], int] = {}
    resolved = False
    for _ in range(style.resolver_max_iters):
        collision = next(
            ((i, j)
             for pos_a, i in enumerate(solid)
             for j in solid[pos_a + 1:]
             if rects_overlap(out[i].rect, out[j].rect)),
            None)
        if collision is None:
            resolved = True
            break
        i, j = collision
        # Lower priority moves; earlier placement wins a tie.
        if _KIND_PRIORITY[out[i].kind] > _KIND_PRIORITY[out[j].kind]:
            victim, other = i, j
        else:
            victim, other = j, i
        vrect, orect = out[victim].rect, out[other].rect
        ox, oy = _overlap_extents(vrect, orect)
        vc, oc = rect_center(vrect), rect_center(orect)
        # A repeated configuration means the smaller-overlap axis is
        # ping-ponging the victim between neighbours (or into a wall).
        # Alternate the axis on each revisit, and shove harder the more
        # often the layout falls back into the same rut.
        state = tuple(out[k].rect for k in solid)
        revisits = seen.get(state, 0)
        seen[state] = revisits + 1
        if revisits >= _RELOCATE_AFTER_REVISITS:
            # Nudging keeps funnelling the victim back into this exact
            # configuration; jump it to open ground instead.
            free = _nearest_free_rect(
                (vrect[2] - vrect[0], vrect[3] - vrect[1]),
                out[victim].anchor,
                [out[k].rect for k in solid if k != victim],
                image_dims)
            if free is not None:
                out[victim].rect = free
                continue
        step = style.resolver_step_px * max(1, revisits)
        if (ox <= oy) != (revisits % 2 == 1):
            sign = 1.0 if vc[0] >= oc[0] else -1.0
            shift = (step * sign, 0.0)
        else:
            sign = 1.0 if vc[1] >= oc[1] else -1.0
            shift = (0.0, step * sign)
        moved = (vrect[0] + shift[0], vrect[1] + shift[1],
                 vrect[2] + shift[0], vrect[3] + shift[1])
        out[victim].rect = clamp_rect(moved, image_dims)
    else:
        resolved = not any(
            rects_overlap(out[i].rect, out[j].rect)
            for pos_a, i in enumerate(solid) for j in solid[pos_a + 1:])

    if not resolved:
        warnings.warn(
            f"collision resolver hit {style.resolver_max_iters} iterations "
            "with overlaps remaining", UnresolvedLayoutWarning, stacklevel=2)

    for p in list(out):
        if p.kind != "edge_label":
            continue
        center = rect_center(p.rect)
        if math.dist(center, p.anchor) > 1.0:
            out.append(MarkPlacement(
                kind="dashed_guide", anchor=p.anchor, owner=p.owner,
                color=p.color, points=(center, p.anchor)))
    return ResolvedLayout(out, resolved)
