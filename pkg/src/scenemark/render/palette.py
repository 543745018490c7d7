"""Deterministic class colors and contrast-aware fill/font pairs."""

from __future__ import annotations

import colorsys
import zlib

from ..errors import ValidationError

RGB = tuple[int, int, int]

# Conjugate golden ratio: successive multiples land maximally far apart on
# the hue wheel, so nearby hash values still get visually distinct hues.
_GOLDEN = 0.6180339887498949

_SATURATION = 0.85
_VALUE = 0.95

WHITE: RGB = (255, 255, 255)
BLACK: RGB = (0, 0, 0)
DARK_FILL: RGB = (40, 40, 40)


def class_color(class_label: str, palette_seed: int = 7) -> RGB:
    """Stable hue for a class label: identical labels always map to the
    identical color, regardless of insertion order or process."""
    if not class_label:
        raise ValidationError("class label must be non-empty", field="class_label")
    bucket = zlib.crc32(class_label.encode("utf-8")) + palette_seed
    hue = (bucket * _GOLDEN) % 1.0
    r, g, b = colorsys.hsv_to_rgb(hue, _SATURATION, _VALUE)
    return (round(r * 255), round(g * 255), round(b * 255))


def _linearize(channel: int) -> float:
    c = channel / 255.0
    return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4


def relative_luminance(color: RGB) -> float:
    """sRGB relative luminance in [0, 1]."""
    r, g, b = (_linearize(c) for c in color)
    return 0.2126 * r + 0.7152 * g + 0.0722 * b


def contrast_colors(border: RGB) -> tuple[RGB, RGB]:
    """(fill, font) guaranteeing readable text inside a border-colored mark."""
    for c in border:
        if not 0 <= c <= 255:
            raise ValidationError(f"RGB channel {c} out of range", field="border")
    if relative_luminance(border) > 0.5:
        return WHITE, BLACK
    return DARK_FILL, WHITE
