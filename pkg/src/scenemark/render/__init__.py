from .compose import RenderResult, compose_image, layout_to_json, render_scene
from .layout import (
    MarkPlacement,
    ResolvedLayout,
    UnresolvedLayoutWarning,
    layout_marks,
    object_center,
    resolve_collisions,
)
from .palette import class_color, contrast_colors, relative_luminance

__all__ = [
    "MarkPlacement",
    "RenderResult",
    "ResolvedLayout",
    "UnresolvedLayoutWarning",
    "class_color",
    "compose_image",
    "contrast_colors",
    "layout_marks",
    "layout_to_json",
    "object_center",
    "relative_luminance",
    "render_scene",
    "resolve_collisions",
]
