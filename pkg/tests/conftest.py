import json
import random
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scenemark import BoundingBox, ObjectInstance, PipelineConfig
from scenemark.types import DepthMap

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def cfg() -> PipelineConfig:
    return PipelineConfig()


def make_object(class_label, box, confidence=0.9, mask=None, mark_id=None):
    return ObjectInstance(class_label=class_label, confidence=confidence,
                          box=BoundingBox(*box), mask=mask, mark_id=mark_id)


def scene_to_objects(boxes, classes):
    return [make_object(c, b) for b, c in zip(boxes, classes)]


def depth_map_for(centers_depths, image_dims) -> DepthMap:
    """A depth map whose 3x3 window around each center is one constant."""
    width, height = image_dims
    values = np.zeros((height, width))
    for (cx, cy), depth in centers_depths:
        values[max(0, cy - 1):cy + 2, max(0, cx - 1):cx + 2] = depth
    return DepthMap(width, height, values)


def scene_depth_map(boxes, depths, image_dims) -> DepthMap:
    centers = [(int((b[0] + b[2]) // 2), int((b[1] + b[3]) // 2))
               for b in boxes]
    return depth_map_for(list(zip(centers, depths)), image_dims)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)


def write_detection_fixture(path: Path, image_path: str, image_dims,
                            detections, masks=None) -> Path:
    doc = {
        "image": {"path": image_path, "width": image_dims[0],
                  "height": image_dims[1]},
        "detections": [
            {"detector_id": d.get("detector_id", "det_a"),
             "class_label": d["class_label"],
             "confidence": d["confidence"],
             "box": list(d["box"])}
            for d in detections
        ],
        "masks": masks or {},
    }
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path
