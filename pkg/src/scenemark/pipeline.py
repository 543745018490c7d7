"""End-to-end orchestration: files in, annotated artifacts out.

Stages run in a fixed order (fusion, relations, filtering, render, prompt)
with wall-clock timing per stage. Any stage failure is re-raised as a
StageFailure naming the stage, so callers can report where a run died
without parsing tracebacks. All artifact writes are atomic.
"""

from __future__ import annotations

import dataclasses
import io
import json
import os
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from PIL import Image

from .config import PipelineConfig
from .errors import PipelineError, ValidationError
from .filtering import (
    RelationLexicon,
    SynonymLexicon,
    WordVectorTable,
    filter_scene,
)
from .fusion import fuse_detections, load_detection_file
from .pgm import load_depth_pgm
from .prompting import PromptPayload, assign_ids, build_prompt, verbalize_scene_graph
from .relations import build_relation_set
from .render import UnresolvedLayoutWarning, layout_to_json, render_scene
from .types import SceneGraph

STAGES = ("fusion", "relations", "filtering", "render", "prompt")

ARTIFACT_IMAGE = "annotated.png"
ARTIFACT_GRAPH = "scene_graph.json"
ARTIFACT_PROMPT = "prompt.json"
ARTIFACT_LAYOUT = "layout.json"


class StageFailure(PipelineError):
    """A pipeline stage raised; carries the stage name for reporting."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class AnnotateRequest:
    image_path: str
    detections_path: str
    query: str
    out_dir: str
    depth_path: str | None = None
    config: PipelineConfig = field(default_factory=PipelineConfig)
    synonyms_path: str | None = None
    relation_lexicon_path: str | None = None
    vectors_path: str | None = None


@dataclass
class AnnotateOutcome:
    scene_graph: SceneGraph
    prompt: PromptPayload
    artifacts: dict[str, str]
    timings: dict[str, float]
    warnings: list[str]
    layout_resolved: bool


class _StageClock:
    def __init__(self):
        self.timings: dict[str, float] = {}

    def run(self, stage: str, fn):
        start = time.perf_counter()
        try:
            return fn()
        except PipelineError as exc:
            raise StageFailure(stage, exc) from exc
        except (OSError, json.JSONDecodeError) as exc:
            raise StageFailure(stage, exc) from exc
        finally:
            self.timings[stage] = time.perf_counter() - start


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _dump_json(obj) -> bytes:
    return (json.dumps(obj, indent=2) + "\n").encode("utf-8")


def scene_graph_to_json(sg: SceneGraph, image_path: str,
                        image_dims: tuple[int, int], id_style: str) -> dict:
    nodes = []
    for obj in sg.objects:
        nodes.append({
            "id": obj.mark_id.render(id_style) if obj.mark_id else None,
            "class": obj.class_label,
            "box": [obj.box.x_min, obj.box.y_min, obj.box.x_max, obj.box.y_max],
            "confidence": obj.confidence,
        })
    edges = []
    for rel in sg.relations:
        edges.append({
            "head_id": nodes[rel.head_index]["id"],
            "label": rel.label,
            "modifier": rel.modifier,
            "tail_id": nodes[rel.tail_index]["id"],
        })
    return {
        "image": {"path": image_path, "width": image_dims[0],
                  "height": image_dims[1]},
        "nodes": nodes,
        "edges": edges,
    }


def annotate(request: AnnotateRequest) -> AnnotateOutcome:
    cfg = request.config
    clock = _StageClock()
    notes: list[str] = []

    def _fusion():
        det_file = load_detection_file(request.detections_path)
        return det_file, fuse_detections(det_file, cfg)

    det_file, objects = clock.run("fusion", _fusion)
    image_dims = det_file.image_dims

    def _relations():
        depth = None
        if request.depth_path is not None:
            depth = load_depth_pgm(request.depth_path, expected_dims=image_dims)
        else:
            notes.append("no depth map supplied; depth relations omitted")
        return build_relation_set(objects, depth, cfg, image_dims=image_dims)

    relations = clock.run("relations", _relations)

    def _filtering():
        synonyms = (SynonymLexicon.load(request.synonyms_path)
                    if request.synonyms_path else SynonymLexicon.load_default())
        rel_lex = (RelationLexicon.load(request.relation_lexicon_path)
                   if request.relation_lexicon_path
                   else RelationLexicon.load_default())
        vectors = (WordVectorTable.load(request.vectors_path)
                   if request.vectors_path else WordVectorTable.empty())
        sg, _ = filter_scene(objects, relations, request.query, synonyms,
                             rel_lex, vectors, cfg)
        return dataclasses.replace(
            sg, objects=assign_ids(sg.objects, cfg.id_style))

    sg = clock.run("filtering", _filtering)

    def _render():
        with Image.open(request.image_path) as handle:
            image = handle.convert("RGB")
        if image.size != image_dims:
            raise ValidationError(
                f"image is {image.size[0]}x{image.size[1]} but detections "
                f"file says {image_dims[0]}x{image_dims[1]}", field="image")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", UnresolvedLayoutWarning)
            result = render_scene(image, sg, cfg)
        for w in caught:
            notes.append(str(w.message))
        return result

    rendered = clock.run("render", _render)

    out_dir = Path(request.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    image_out = out_dir / ARTIFACT_IMAGE

    def _prompt():
        sg_text = None
        if cfg.prompt_mode == "visual_textual":
            sg_text = verbalize_scene_graph(sg, cfg.id_style)
        return build_prompt(cfg.prompt_mode, request.query, sg_text,
                            str(image_out))

    payload = clock.run("prompt", _prompt)

    buf = io.BytesIO()
    rendered.image.save(buf, format="PNG")
    _write_atomic(image_out, buf.getvalue())
    graph_doc = scene_graph_to_json(sg, request.image_path, image_dims,
                                    cfg.id_style)
    _write_atomic(out_dir / ARTIFACT_GRAPH, _dump_json(graph_doc))
    _write_atomic(out_dir / ARTIFACT_PROMPT, _dump_json(payload.to_json()))
    layout_doc = layout_to_json(image_dims, rendered.placements,
                                rendered.resolved)
    _write_atomic(out_dir / ARTIFACT_LAYOUT, _dump_json(layout_doc))

    return AnnotateOutcome(
        scene_graph=sg,
        prompt=payload,
        artifacts={
            "image": str(image_out),
            "scene_graph": str(out_dir / ARTIFACT_GRAPH),
            "prompt": str(out_dir / ARTIFACT_PROMPT),
            "layout": str(out_dir / ARTIFACT_LAYOUT),
        },
        timings=dict(clock.timings),
        warnings=notes,
        layout_resolved=rendered.resolved,
    )
