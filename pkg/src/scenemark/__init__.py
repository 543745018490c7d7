"""Scene-graph visual prompting for multimodal language models.

Turn raw multi-detector output plus a relative depth map into a rendered,
query-filtered spatial scene graph and a ready-to-send prompt payload.
"""

from .config import PipelineConfig, RenderStyle, dumps_config, load_config, loads_config
from .errors import (
    ConfigError,
    ParseError,
    PipelineError,
    RenderError,
    ValidationError,
)
from .filtering import (
    RelationLexicon,
    SynonymLexicon,
    WordVectorTable,
    filter_scene,
)
from .fusion import (
    DetectionFile,
    RawDetection,
    fuse_detections,
    fuse_wbf,
    load_detection_file,
    parse_detection_file,
)
from .geometry import BoundingBox, iou
from .pgm import dump_depth_pgm, load_depth_pgm, parse_depth_pgm
from .pipeline import AnnotateOutcome, AnnotateRequest, StageFailure, annotate
from .prompting import (
    PromptPayload,
    assign_ids,
    build_prompt,
    parse_triplets,
    verbalize_scene_graph,
)
from .relations import build_relation_set
from .render import render_scene
from .types import (
    DepthMap,
    MarkId,
    ObjectInstance,
    RegionMask,
    Relation,
    SceneGraph,
)

__version__ = "0.1.0"

__all__ = [
    "AnnotateOutcome",
    "AnnotateRequest",
    "BoundingBox",
    "ConfigError",
    "DepthMap",
    "DetectionFile",
    "MarkId",
    "ObjectInstance",
    "ParseError",
    "PipelineConfig",
    "PipelineError",
    "PromptPayload",
    "RawDetection",
    "RegionMask",
    "Relation",
    "RelationLexicon",
    "RenderError",
    "RenderStyle",
    "SceneGraph",
    "StageFailure",
    "SynonymLexicon",
    "ValidationError",
    "WordVectorTable",
    "annotate",
    "assign_ids",
    "build_prompt",
    "build_relation_set",
    "dump_depth_pgm",
    "dumps_config",
    "filter_scene",
    "fuse_detections",
    "fuse_wbf",
    "iou",
    "load_config",
    "load_depth_pgm",
    "load_detection_file",
    "loads_config",
    "parse_detection_file",
    "parse_depth_pgm",
    "parse_triplets",
    "render_scene",
    "verbalize_scene_graph",
]
