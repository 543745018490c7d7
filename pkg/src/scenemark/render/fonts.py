"""Bundled monospace font loading with an upfront glyph audit.

The font ships inside the package so rendering does not depend on whatever
the host OS installed, and the audit runs once at load time so a missing
glyph fails loudly instead of silently drawing tofu boxes per image.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from string import ascii_letters, digits

from PIL import ImageFont

from ..errors import RenderError

FONT_RESOURCE = "DejaVuSansMono.ttf"

# Every character the renderer can emit: mark IDs, relation labels with
# modifiers, and arrow/guide annotations.
REQUIRED_CHARSET = ascii_letters + digits + "_-()<>. ,?"


@lru_cache(maxsize=32)
def load_font(size_px: int) -> ImageFont.FreeTypeFont:
    if size_px < 1:
        raise RenderError(f"font size must be positive, got {size_px}")
    ref = resources.files("scenemark.data.fonts").joinpath(FONT_RESOURCE)
    with resources.as_file(ref) as path:
        font = ImageFont.truetype(str(path), size_px)
    _audit_glyphs(font)
    return font


def _audit_glyphs(font: ImageFont.FreeTypeFont) -> None:
    missing = []
    for ch in REQUIRED_CHARSET:
        box = font.getbbox(ch)
        # A glyph that renders nothing (and is not a legitimate blank)
        # means the face lacks coverage for it.
        if ch != " " and (box is None or box[2] - box[0] <= 0):
            missing.append(ch)
    if missing:
        raise RenderError(
            f"bundled font lacks glyphs for: {''.join(missing)!r}"
        )


def text_extent(text: str, font: ImageFont.FreeTypeFont) -> tuple[int, int, int, int]:
    """Ink bounding box (x0, y0, x1, y1) of ``text`` drawn at the origin."""
    return font.getbbox(text)
