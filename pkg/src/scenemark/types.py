"""Domain types shared by every pipeline stage.

Everything here is an immutable value object; stages derive new instances
with :func:`dataclasses.replace` instead of mutating.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import BoundingBox

# Relation ontology: four directional labels, two depth labels, one
# proximity fallback. Tuple order is the canonical tie-break order.
DIRECTIONAL_LABELS = ("above", "below", "left_of", "right_of")
DEPTH_LABELS = ("in_front_of", "behind")
PROXIMITY_LABELS = ("near",)
RELATION_LABELS = DIRECTIONAL_LABELS + DEPTH_LABELS + PROXIMITY_LABELS

# Closeness qualifiers for directional relations, strongest first.
MODIFIERS = ("touching", "very_close", "close")

INVERSE_LABEL = {
    "above": "below",
    "below": "above",
    "left_of": "right_of",
    "right_of": "left_of",
    "in_front_of": "behind",
    "behind": "in_front_of",
    "near": "near",
}


def ontology_order(label: str) -> int:
    return RELATION_LABELS.index(label)


@dataclass(frozen=True)
class RegionMask:
    """Binary region as run-length counts over the full image grid.

    ``rle`` is row-major and alternates background/foreground runs,
    starting with a background count (possibly 0).
    """

    width: int
    height: int
    rle: tuple[int, ...]

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValidationError("mask dimensions must be positive", field="width")
        if any(c < 0 for c in self.rle):
            raise ValidationError("run counts must be >= 0", field="rle")
        if sum(self.rle) != self.width * self.height:
            raise ValidationError(
                f"run counts sum to {sum(self.rle)}, expected {self.width * self.height}",
                field="rle",
            )

    def decode(self) -> np.ndarray:
        """Expand to a (height, width) boolean grid."""
        values = np.zeros(len(self.rle), dtype=bool)
        values[1::2] = True
        flat = np.repeat(values, np.asarray(self.rle, dtype=np.int64))
        return flat.reshape(self.height, self.width)

    @classmethod
    def encode(cls, grid: np.ndarray) -> "RegionMask":
        """Run-length encode a (height, width) boolean grid."""
        flat = np.asarray(grid, dtype=bool).ravel()
        h, w = grid.shape
        if flat.size == 0:
            raise ValidationError("empty grid", field="rle")
        changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
        bounds = np.concatenate(([0], changes, [flat.size]))
        counts = np.diff(bounds).tolist()
        if flat[0]:
            counts = [0] + counts
        return cls(width=w, height=h, rle=tuple(int(c) for c in counts))

    @classmethod
    def from_box(cls, box: BoundingBox, width: int, height: int) -> "RegionMask":
        """Rectangular fallback mask covering the box's pixel footprint."""
        grid = np.zeros((height, width), dtype=bool)
        x0 = max(0, int(np.floor(box.x_min)))
        y0 = max(0, int(np.floor(box.y_min)))
        x1 = min(width, int(np.ceil(box.x_max)))
        y1 = min(height, int(np.ceil(box.y_max)))
        grid[y0:y1, x0:x1] = True
        return cls.encode(grid)

    def foreground_area(self) -> int:
        return int(sum(self.rle[1::2]))


@dataclass(frozen=True)
class MarkId:
    """Speakable object identifier: a 1-based number, optionally class-prefixed."""

    numeric: int
    class_label: str

    def __post_init__(self):
        if self.numeric < 1:
            raise ValidationError("numeric id must be >= 1", field="numeric")

    @property
    def textual(self) -> str:
        return f"{self.class_label}_{self.numeric}"

    def render(self, id_style: str) -> str:
        return self.textual if id_style == "textual" else str(self.numeric)


@dataclass(frozen=True)
class ObjectInstance:
    """A detected region: class, confidence, box, optional mask and mark id.

    ``source_indices`` records which raw detections were fused into this
    instance (positions in the originating detection file); it lets mask
    attachment find the members without re-clustering.
    """

    class_label: str
    confidence: float
    box: BoundingBox
    mask: RegionMask | None = None
    mark_id: MarkId | None = None
    source_indices: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.class_label:
            raise ValidationError("class label must be non-empty", field="class_label")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError("confidence must be in [0, 1]", field="confidence")


@dataclass(frozen=True, eq=False)
class DepthMap:
    """Relative depth grid in [0, 1]; higher means nearer to the camera."""

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (self.height, self.width):
            raise ValidationError(
                f"grid shape {arr.shape} does not match {self.height}x{self.width}",
                field="values",
            )
        if arr.size and (float(arr.min()) < 0.0 or float(arr.max()) > 1.0):
            raise ValidationError("depth values must lie in [0, 1]", field="values")
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True)
class Relation:
    """Directed edge ``head --(label)--> tail``, read "head is <label> tail"."""

    head_index: int
    tail_index: int
    label: str
    modifier: str | None = None
    center_distance: float = 0.0
    relevance_rank: int = 1

    def __post_init__(self):
        if self.head_index == self.tail_index:
            raise ValidationError("relation endpoints must differ", field="tail_index")
        if self.label not in RELATION_LABELS:
            raise ValidationError(f"unknown label {self.label!r}", field="label")
        if self.modifier is not None:
            if self.modifier not in MODIFIERS:
                raise ValidationError(f"unknown modifier {self.modifier!r}", field="modifier")
            if self.label not in DIRECTIONAL_LABELS:
                raise ValidationError(
                    "modifier allowed on directional labels only", field="modifier"
                )
        if self.relevance_rank not in (0, 1):
            raise ValidationError("relevance_rank must be 0 or 1", field="relevance_rank")

    @property
    def qualified_label(self) -> str:
        """Label with the modifier appended, e.g. ``left_of_touching``."""
        return self.label if self.modifier is None else f"{self.label}_{self.modifier}"

    def pair(self) -> frozenset[int]:
        return frozenset((self.head_index, self.tail_index))


@dataclass(frozen=True)
class SceneGraph:
    """Filtered object and relation sets, ready to render and verbalize."""

    objects: tuple[ObjectInstance, ...]
    relations: tuple[Relation, ...] = ()

    def __post_init__(self):
        n = len(self.objects)
        seen_pairs: set[frozenset[int]] = set()
        for rel in self.relations:
            if not (0 <= rel.head_index < n and 0 <= rel.tail_index < n):
                raise ValidationError(
                    f"relation endpoint out of range for {n} objects", field="relations"
                )
            if rel.pair() in seen_pairs:
                raise ValidationError(
                    "at most one relation per unordered object pair", field="relations"
                )
            seen_pairs.add(rel.pair())

    @property
    def is_empty(self) -> bool:
        return not self.objects
