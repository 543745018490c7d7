"""Rasterize resolved mark placements onto the source image.

Paint order is fixed so later, smaller marks stay legible over earlier,
larger ones: mask fills, mask contours, arrows, dashed guides, relation
label boxes, ID boxes. Everything here is a pure function of its inputs;
two calls with the same image, graph, and style produce identical bytes.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np
from PIL import Image, ImageDraw

from ..config import PipelineConfig, RenderStyle
from ..types import ObjectInstance, SceneGraph
from .fonts import load_font, text_extent
from .layout import (
    MarkPlacement,
    Point,
    layout_marks,
    resolve_collisions,
)
from .palette import BLACK, RGB, WHITE, contrast_colors

_BEZIER_SEGMENTS = 32
_DASH_ON_PX = 6.0
_DASH_OFF_PX = 4.0


class RenderResult(NamedTuple):
    image: Image.Image
    placements: list[MarkPlacement]
    resolved: bool


def _erode4(mask: np.ndarray) -> np.ndarray:
    """One 4-neighbourhood erosion step; everything beyond the array edge
    counts as background."""
    out = mask.copy()
    out[1:, :] &= mask[:-1, :]
    out[:-1, :] &= mask[1:, :]
    out[:, 1:] &= mask[:, :-1]
    out[:, :-1] &= mask[:, 1:]
    out[0, :] = False
    out[-1, :] = False
    out[:, 0] = False
    out[:, -1] = False
    return out


def _local_window(obj: ObjectInstance, shape: tuple[int, int],
                  pad: int) -> tuple[int, int, int, int]:
    height, width = shape
    x0 = max(0, math.floor(obj.box.x_min) - pad)
    y0 = max(0, math.floor(obj.box.y_min) - pad)
    x1 = min(width, math.ceil(obj.box.x_max) + pad)
    y1 = min(height, math.ceil(obj.box.y_max) + pad)
    return x0, y0, x1, y1


def _object_footprint(obj: ObjectInstance, shape: tuple[int, int],
                      window: tuple[int, int, int, int]) -> np.ndarray:
    x0, y0, x1, y1 = window
    if obj.mask is not None:
        return obj.mask.decode()[y0:y1, x0:x1]
    local = np.zeros((y1 - y0, x1 - x0), dtype=bool)
    bx0 = max(math.floor(obj.box.x_min), x0)
    by0 = max(math.floor(obj.box.y_min), y0)
    bx1 = min(math.ceil(obj.box.x_max), x1)
    by1 = min(math.ceil(obj.box.y_max), y1)
    if bx1 > bx0 and by1 > by0:
        local[by0 - y0:by1 - y0, bx0 - x0:bx1 - x0] = True
    return local


def _paint_mask(arr: np.ndarray, obj: ObjectInstance, color: RGB,
                style: RenderStyle) -> None:
    window = _local_window(obj, arr.shape[:2], style.border_width_px + 2)
    x0, y0, x1, y1 = window
    if x1 <= x0 or y1 <= y0:
        return
    local = _object_footprint(obj, arr.shape[:2], window)
    if not local.any():
        return
    view = arr[y0:y1, x0:x1]
    rgb = np.array(color, dtype=np.float64)
    src = view[local].astype(np.float64)
    view[local] = np.rint(
        src * (1.0 - style.mask_alpha) + rgb * style.mask_alpha
    ).astype(np.uint8)

    eroded = local
    for _ in range(style.border_width_px):
        eroded = _erode4(eroded)
    view[local & ~eroded] = np.array(color, dtype=np.uint8)


def _bezier_points(p0: Point, control: Point, p1: Point) -> list[Point]:
    pts = []
    for i in range(_BEZIER_SEGMENTS + 1):
        t = i / _BEZIER_SEGMENTS
        u = 1.0 - t
        pts.append((
            u * u * p0[0] + 2 * u * t * control[0] + t * t * p1[0],
            u * u * p0[1] + 2 * u * t * control[1] + t * t * p1[1],
        ))
    return pts


def _draw_arrow(draw: ImageDraw.ImageDraw, mark: MarkPlacement,
                style: RenderStyle) -> None:
    p0, control, p1 = mark.points
    draw.line(_bezier_points(p0, control, p1), fill=mark.color,
              width=style.arrow_width_px, joint="curve")
    # Arrowhead at the tail end, aligned with the curve's exit tangent.
    tx, ty = p1[0] - control[0], p1[1] - control[1]
    norm = math.hypot(tx, ty)
    if norm == 0.0:
        tx, ty = p1[0] - p0[0], p1[1] - p0[1]
        norm = math.hypot(tx, ty)
    if norm == 0.0:
        return
    tx, ty = tx / norm, ty / norm
    head_len = 4.0 + 3.0 * style.arrow_width_px
    half = head_len / 2.0
    base = (p1[0] - tx * head_len, p1[1] - ty * head_len)
    perp = (-ty, tx)
    draw.polygon(
        [p1,
         (base[0] + perp[0] * half, base[1] + perp[1] * half),
         (base[0] - perp[0] * half, base[1] - perp[1] * half)],
        fill=mark.color)


def _draw_dashed(draw: ImageDraw.ImageDraw, start: Point, end: Point,
                 color: RGB) -> None:
    length = math.dist(start, end)
    if length == 0.0:
        return
    ux, uy = (end[0] - start[0]) / length, (end[1] - start[1]) / length
    pos = 0.0
    while pos < length:
        seg = min(pos + _DASH_ON_PX, length)
        draw.line([(start[0] + ux * pos, start[1] + uy * pos),
                   (start[0] + ux * seg, start[1] + uy * seg)],
                  fill=color, width=1)
        pos += _DASH_ON_PX + _DASH_OFF_PX


def _draw_text_box(draw: ImageDraw.ImageDraw, mark: MarkPlacement,
                   fill: RGB, font_color: RGB, border_width: int,
                   style: RenderStyle, font) -> None:
    x0, y0, x1, y1 = (round(v) for v in mark.rect)
    draw.rectangle([x0, y0, x1, y1], fill=fill, outline=mark.color,
                   width=border_width)
    ink = text_extent(mark.text, font)
    draw.text((x0 + style.label_padding_px - ink[0],
               y0 + style.label_padding_px - ink[1]),
              mark.text, font=font, fill=font_color)


def compose_image(
    image: Image.Image,
    scene_graph: SceneGraph,
    placements: Sequence[MarkPlacement],
    style: RenderStyle,
) -> Image.Image:
    base = image.convert("RGB") if image.mode != "RGB" else image.copy()
    arr = np.array(base, dtype=np.uint8)

    for mark in placements:
        if mark.kind == "mask":
            _paint_mask(arr, scene_graph.objects[mark.owner[1]], mark.color, style)

    out = Image.fromarray(arr, "RGB")
    draw = ImageDraw.Draw(out)
    font = load_font(style.font_size_for(out.size))

    for mark in placements:
        if mark.kind == "arrow":
            _draw_arrow(draw, mark, style)
    for mark in placements:
        if mark.kind == "dashed_guide":
            _draw_dashed(draw, mark.points[0], mark.points[1], mark.color)
    for mark in placements:
        if mark.kind == "edge_label":
            _draw_text_box(draw, mark, WHITE, BLACK,
                           max(1, style.arrow_width_px), style, font)
    for mark in placements:
        if mark.kind == "id_box":
            fill, font_color = contrast_colors(mark.color)
            _draw_text_box(draw, mark, fill, font_color,
                           max(1, style.border_width_px - 1), style, font)
    return out


def render_scene(
    image: Image.Image,
    scene_graph: SceneGraph,
    cfg: PipelineConfig,
) -> RenderResult:
    """layout → collision resolution → rasterization, in one call."""
    if scene_graph.is_empty:
        copy = image.convert("RGB") if image.mode != "RGB" else image.copy()
        return RenderResult(copy, [], True)
    placements = layout_marks(image.size, scene_graph, cfg)
    layout = resolve_collisions(placements, image.size, cfg.style)
    out = compose_image(image, scene_graph, layout.placements, cfg.style)
    return RenderResult(out, layout.placements, layout.resolved)


def layout_to_json(image_dims: tuple[int, int],
                   placements: Sequence[MarkPlacement],
                   resolved: bool) -> dict:
    """Sidecar schema mapping every mark back to its owner, so mark IDs
    spoken by a model can be traced to image regions."""
    return {
        "image": {"width": image_dims[0], "height": image_dims[1]},
        "resolved": resolved,
        "marks": [p.to_json() for p in placements],
    }
