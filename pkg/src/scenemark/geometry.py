"""Bounding boxes and the shared geometric primitives.

All coordinates live in the raster frame: origin at the top-left corner,
x grows rightward, y grows downward. Distance thresholds are compared in
a fixed square reference frame (default 1000x1000) so that they carry the
same meaning regardless of source-image resolution; see
``to_reference_frame``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, ValidationError

Point = tuple[float, float]

REFERENCE_FRAME_SIZE = 1000.0


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box, xyxy order, pixel units."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        for name in ("x_min", "y_min", "x_max", "y_max"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError("coordinate must be finite", field=name)
            if v < 0:
                raise ValidationError("coordinate must be >= 0", field=name)
        if not self.x_min < self.x_max:
            raise ValidationError("x_min must be < x_max", field="x_min")
        if not self.y_min < self.y_max:
            raise ValidationError("y_min must be < y_max", field="y_min")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection-over-union of two boxes; 0 when disjoint."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def box_center(b: BoundingBox) -> Point:
    """Midpoint of both axes."""
    return ((b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0)


def to_reference_frame(
    p: Point, image_dims: tuple[int, int], frame: float = REFERENCE_FRAME_SIZE
) -> Point:
    """Rescale a pixel point into the square reference frame."""
    w, h = image_dims
    if w <= 0 or h <= 0:
        raise ConfigError(f"image dimensions must be positive, got {w}x{h}")
    return (p[0] * frame / w, p[1] * frame / h)


def from_reference_frame(
    p: Point, image_dims: tuple[int, int], frame: float = REFERENCE_FRAME_SIZE
) -> Point:
    """Inverse of :func:`to_reference_frame`."""
    w, h = image_dims
    if w <= 0 or h <= 0:
        raise ConfigError(f"image dimensions must be positive, got {w}x{h}")
    return (p[0] * w / frame, p[1] * h / frame)


def center_distance(a: BoundingBox, b: BoundingBox) -> float:
    """Euclidean distance between box centers, pixels."""
    return math.dist(box_center(a), box_center(b))


def normalized_center_distance(
    a: BoundingBox, b: BoundingBox, image_dims: tuple[int, int]
) -> float:
    """Center distance as a fraction of the image diagonal."""
    w, h = image_dims
    if w <= 0 or h <= 0:
        raise ConfigError(f"image dimensions must be positive, got {w}x{h}")
    return center_distance(a, b) / math.hypot(w, h)


def box_gap(a: BoundingBox, b: BoundingBox) -> float:
    """Minimal edge separation along the separating axis; 0 when overlapping."""
    gap_x = max(a.x_min, b.x_min) - min(a.x_max, b.x_max)
    gap_y = max(a.y_min, b.y_min) - min(a.y_max, b.y_max)
    return max(0.0, gap_x, gap_y)


def clamp_box_to_image(
    box: tuple[float, float, float, float], image_dims: tuple[int, int]
) -> BoundingBox:
    """Clamp raw xyxy coordinates into the image rectangle.

    Detectors routinely overshoot image borders by a few pixels; clamping
    keeps those detections instead of rejecting them. A box entirely
    outside the image degenerates and is rejected.
    """
    w, h = image_dims
    x0, y0, x1, y1 = box
    if not all(math.isfinite(v) for v in (x0, y0, x1, y1)):
        raise ValidationError("coordinates must be finite", field="box")
    x0, x1 = max(0.0, min(x0, w)), max(0.0, min(x1, w))
    y0, y1 = max(0.0, min(y0, h)), max(0.0, min(y1, h))
    if x0 >= x1 or y0 >= y1:
        raise ValidationError("box degenerates after clamping to image", field="box")
    return BoundingBox(x0, y0, x1, y1)
