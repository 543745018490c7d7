"""Mark ID assignment, triplet verbalization, and prompt assembly.

The prompt wording lives in data files rather than string literals so the
shipped text can be audited (and frozen in tests) byte for byte. Two modes
exist: image-only, and image plus a textual triplet block.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Sequence

from .config import ID_STYLES, PROMPT_MODES
from .errors import ParseError, ValidationError
from .types import MarkId, ObjectInstance, SceneGraph

_TEMPLATE_FILES = {
    "visual": "template_visual.txt",
    "visual_textual": "template_visual_textual.txt",
}
_SYSTEM_MARKER = "=== SYSTEM ===\n"
_USER_MARKER = "\n=== USER ===\n"
_SCENE_GRAPH_HEADING = "Scene Graph (Textual):"

_TRIPLET_RE = re.compile(r"^(\S+) --\((\S+)\)--> (\S+)$")


@dataclass(frozen=True)
class PromptPayload:
    system_text: str
    user_text: str
    image_ref: str
    mode: str

    def __post_init__(self):
        if self.mode not in PROMPT_MODES:
            raise ValidationError(f"unknown prompt mode {self.mode!r}", field="mode")
        has_block = _SCENE_GRAPH_HEADING in self.user_text
        if self.mode == "visual_textual" and not has_block:
            raise ValidationError("visual_textual prompt lacks the textual "
                                  "scene-graph block", field="user_text")
        if self.mode == "visual" and has_block:
            raise ValidationError("visual prompt must not embed a textual "
                                  "scene-graph block", field="user_text")

    def to_json(self) -> dict:
        return {
            "system": self.system_text,
            "user": self.user_text,
            "image": self.image_ref,
            "mode": self.mode,
        }


@lru_cache(maxsize=None)
def _load_template(mode: str) -> tuple[str, str]:
    text = resources.files("scenemark.data").joinpath(
        _TEMPLATE_FILES[mode]).read_text("utf-8")
    if not text.startswith(_SYSTEM_MARKER):
        raise ParseError(f"template {mode}: missing system marker")
    body = text[len(_SYSTEM_MARKER):]
    cut = body.find(_USER_MARKER)
    if cut < 0:
        raise ParseError(f"template {mode}: missing user marker")
    user = body[cut + len(_USER_MARKER):]
    return body[:cut], user.removesuffix("\n")


def assign_ids(objects: Sequence[ObjectInstance],
               id_style: str = "numeric") -> tuple[ObjectInstance, ...]:
    """Number objects 1..n in their canonical order."""
    if id_style not in ID_STYLES:
        raise ValidationError(f"unknown id style {id_style!r}", field="id_style")
    return tuple(
        dataclasses.replace(obj, mark_id=MarkId(i, obj.class_label))
        for i, obj in enumerate(objects, start=1)
    )


def verbalize_scene_graph(sg: SceneGraph, id_style: str = "textual") -> str:
    """One ``head --(label)--> tail`` line per relation, filtered order."""
    lines = []
    for rel in sg.relations:
        head = sg.objects[rel.head_index].mark_id
        tail = sg.objects[rel.tail_index].mark_id
        if head is None or tail is None:
            raise ValidationError("verbalization requires assigned mark IDs",
                                  field="mark_id")
        lines.append(f"{head.render(id_style)} "
                     f"--({rel.qualified_label})--> "
                     f"{tail.render(id_style)}")
    return "\n".join(lines)


def parse_triplets(text: str) -> list[tuple[str, str, str]]:
    """Inverse of verbalize_scene_graph for round-trip checking."""
    triplets = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        m = _TRIPLET_RE.match(line)
        if m is None:
            raise ParseError(f"line {lineno}: not a triplet: {line!r}")
        triplets.append((m.group(1), m.group(2), m.group(3)))
    return triplets


def build_prompt(mode: str, query: str, sg_text: str | None,
                 image_path: str) -> PromptPayload:
    if mode not in PROMPT_MODES:
        raise ValidationError(f"unknown prompt mode {mode!r}", field="mode")
    if not query:
        raise ValidationError("query must be non-empty", field="query")
    if mode == "visual_textual" and sg_text is None:
        raise ValidationError("visual_textual mode requires the verbalized "
                              "scene graph", field="sg_text")
    system, user = _load_template(mode)
    user = user.replace("{question}", query)
    if mode == "visual_textual":
        user = user.replace("{scene_graph}", sg_text)
    return PromptPayload(system_text=system, user_text=user,
                         image_ref=image_path, mode=mode)
