import numpy as np
import pytest

from scenemark import (
    BoundingBox,
    DepthMap,
    ObjectInstance,
    PipelineConfig,
    build_relation_set,
)
from scenemark.relations import (
    attach_modifier,
    compute_pair_geometry,
    depth_relation,
    directional_relation,
    proximity_relation,
    sample_depth,
)
from scenemark.types import DEPTH_LABELS, DIRECTIONAL_LABELS

from conftest import make_object, scene_depth_map, scene_to_objects
from oracles import oracle_relations, random_scene

SQUARE = (1000, 1000)  # frame scaling is the identity here


def geom_for(head_box, tail_box, image_dims, cfg, dh=0.0, dt=0.0):
    head = make_object("chair", head_box)
    tail = make_object("table", tail_box)
    return compute_pair_geometry(head, tail, image_dims, dh, dt, cfg)


def box_at(cx, cy, half=10.0):
    return (cx - half, cy - half, cx + half, cy + half)


class TestDirectional:
    @pytest.mark.parametrize("dy,label", [(-21, "above"), (21, "below")])
    def test_vertical(self, cfg, dy, label):
        g = geom_for(box_at(500, 500 + dy), box_at(500, 500), SQUARE, cfg)
        assert directional_relation(0, 1, g, cfg).label == label

    @pytest.mark.parametrize("dx,label", [(-21, "left_of"), (21, "right_of")])
    def test_horizontal(self, cfg, dx, label):
        g = geom_for(box_at(500 + dx, 500), box_at(500, 500), SQUARE, cfg)
        assert directional_relation(0, 1, g, cfg).label == label

    def test_margin_is_strict(self, cfg):
        g = geom_for(box_at(500, 520), box_at(500, 500), SQUARE, cfg)
        assert g.dy == 20.0
        assert directional_relation(0, 1, g, cfg) is None

    def test_just_over_margin(self, cfg):
        g = geom_for(box_at(500, 520.5), box_at(500, 500), SQUARE, cfg)
        rel = directional_relation(0, 1, g, cfg)
        assert rel is not None and rel.label == "below"

    def test_tie_prefers_vertical(self, cfg):
        g = geom_for(box_at(530, 530), box_at(500, 500), SQUARE, cfg)
        assert directional_relation(0, 1, g, cfg).label == "below"

    def test_anisotropic_scaling(self, cfg):
        # 30 px horizontally on a 2000-wide image is only 15 frame units,
        # while 12 px vertically on a 500-tall image is 24 frame units.
        g = geom_for(box_at(1030, 262), box_at(1000, 250), (2000, 500), cfg)
        assert g.dx == pytest.approx(15.0)
        assert g.dy == pytest.approx(24.0)
        assert directional_relation(0, 1, g, cfg).label == "below"

    def test_pixel_distance_mode_disables_scaling(self):
        cfg = PipelineConfig(distance_mode="pixel")
        g = geom_for(box_at(1030, 262), box_at(1000, 250), (2000, 500), cfg)
        assert (g.dx, g.dy) == (30.0, 12.0)
        assert directional_relation(0, 1, g, cfg).label == "right_of"


class TestDepth:
    def test_difference_boundary_is_strict(self, cfg):
        g = geom_for(box_at(100, 100), box_at(400, 400), SQUARE, cfg,
                     dh=0.6, dt=0.5)
        assert depth_relation(0, 1, g, cfg) is None

    def test_head_nearer_is_in_front(self, cfg):
        g = geom_for(box_at(100, 100), box_at(400, 400), SQUARE, cfg,
                     dh=0.75, dt=0.5)
        assert depth_relation(0, 1, g, cfg).label == "in_front_of"

    def test_head_farther_is_behind(self, cfg):
        g = geom_for(box_at(100, 100), box_at(400, 400), SQUARE, cfg,
                     dh=0.2, dt=0.5)
        assert depth_relation(0, 1, g, cfg).label == "behind"


class TestNear:
    def test_suppressed_by_directional_label(self, cfg):
        g = geom_for(box_at(500, 530), box_at(500, 500), SQUARE, cfg)
        assert proximity_relation(0, 1, g, {"below"}, cfg) is None

    def test_not_suppressed_by_depth_label(self, cfg):
        g = geom_for(box_at(500, 510), box_at(500, 500), SQUARE, cfg)
        assert proximity_relation(0, 1, g, {"in_front_of"}, cfg).label == "near"

    def test_squared_boundary_is_strict(self):
        cfg = PipelineConfig(tau_dir_margin=100)
        at_limit = geom_for(box_at(550, 550), box_at(500, 500), SQUARE, cfg)
        assert at_limit.dx**2 + at_limit.dy**2 == 5000
        assert proximity_relation(0, 1, at_limit, set(), cfg) is None
        inside = geom_for(box_at(550, 549), box_at(500, 500), SQUARE, cfg)
        assert proximity_relation(0, 1, inside, set(), cfg) is not None

    def test_linear_metric(self):
        cfg = PipelineConfig(tau_dir_margin=100, tau_near=60,
                             near_metric="linear")
        far = geom_for(box_at(550, 540), box_at(500, 500), SQUARE, cfg)
        assert proximity_relation(0, 1, far, set(), cfg) is None  # ~64.03
        close = geom_for(box_at(540, 540), box_at(500, 500), SQUARE, cfg)
        assert proximity_relation(0, 1, close, set(), cfg).label == "near"


class TestModifiers:
    def directional(self, head_box, tail_box, cfg,
                    head_cls="chair", tail_cls="table", dims=SQUARE):
        head = make_object(head_cls, head_box)
        tail = make_object(tail_cls, tail_box)
        g = compute_pair_geometry(head, tail, dims, 0.0, 0.0, cfg)
        rel = directional_relation(0, 1, g, cfg)
        assert rel is not None
        return attach_modifier(rel, g, head_cls, tail_cls, cfg), g

    def test_touching_by_overlap(self, cfg):
        rel, g = self.directional((0, 0, 100, 100), (0, 60, 100, 160), cfg)
        assert g.iou == pytest.approx(0.25)
        assert (rel.label, rel.modifier) == ("above", "touching")

    def test_touching_by_gap_inclusive(self, cfg):
        rel, g = self.directional((0, 0, 100, 100), (0, 103, 100, 203), cfg)
        assert g.box_gap == pytest.approx(3.0)
        assert rel.modifier == "touching"

    def test_gap_just_over_drops_to_close(self, cfg):
        rel, g = self.directional((0, 0, 100, 100),
                                  (0, 103.001, 100, 203.001), cfg)
        assert 0.05 <= g.d_norm < 0.12
        assert rel.modifier == "close"

    def test_very_close(self, cfg):
        rel, g = self.directional((0, 0, 40, 40), (50, 0, 90, 40), cfg)
        assert g.box_gap == pytest.approx(10.0)
        assert g.d_norm < 0.05
        assert (rel.label, rel.modifier) == ("left_of", "very_close")

    def test_beyond_close_stays_plain(self, cfg):
        rel, g = self.directional((0, 0, 40, 40), (400, 0, 440, 40), cfg)
        assert g.d_norm >= 0.12
        assert rel.modifier is None

    def test_same_class_never_modified(self, cfg):
        rel, _ = self.directional((0, 0, 100, 100), (0, 60, 100, 160), cfg,
                                  head_cls="chair", tail_cls="chair")
        assert rel.modifier is None

    def test_touching_precedence_over_very_close(self, cfg):
        rel, g = self.directional((0, 0, 100, 100), (0, 30, 100, 130), cfg)
        assert g.iou > cfg.tau_touch_iou and g.d_norm < cfg.tau_v_close
        assert rel.modifier == "touching"

    def test_gap_measured_in_frame_units(self, cfg):
        # 7 px of separation shrinks to 2.8 frame units on a 2500-wide image.
        rel, g = self.directional((0, 0, 100, 100), (107, 0, 207, 100), cfg,
                                  dims=(2500, 2500))
        assert g.box_gap == pytest.approx(2.8)
        assert rel.modifier == "touching"


class TestSampleDepth:
    def test_median_rejects_speckle(self):
        values = np.full((9, 9), 0.4)
        values[4, 4] = 1.0  # hot pixel dead on the center
        dm = DepthMap(width=9, height=9, values=values)
        obj = ObjectInstance(class_label="chair", confidence=1.0,
                             box=BoundingBox(3, 3, 6, 6))
        assert sample_depth(dm, obj) == pytest.approx(0.4)

    def test_border_clamp(self):
        dm = DepthMap(width=2, height=2,
                      values=np.array([[0.1, 0.2], [0.3, 0.4]]))
        obj = ObjectInstance(class_label="chair", confidence=1.0,
                             box=BoundingBox(0, 0, 0.5, 0.5))
        assert sample_depth(dm, obj) == pytest.approx(0.25)


def ontology_group(label):
    if label in DIRECTIONAL_LABELS:
        return 0
    if label in DEPTH_LABELS:
        return 1
    return 2


class TestBuildRelationSet:
    def test_canonical_ordering(self, cfg):
        boxes = [box_at(100, 100), box_at(100, 400), box_at(700, 120)]
        objs = scene_to_objects(boxes, ("chair", "table", "lamp"))
        dm = scene_depth_map(boxes, [0.9, 0.5, 0.5], SQUARE)
        rels = build_relation_set(objs, dm, cfg, SQUARE)
        keys = [(r.head_index, r.tail_index, ontology_group(r.label))
                for r in rels]
        assert keys == sorted(keys)
        assert len(set(keys)) == len(keys)

    def test_no_depth_map_skips_depth_group(self, cfg):
        objs = scene_to_objects([box_at(100, 100), box_at(100, 400)],
                                ("chair", "table"))
        rels = build_relation_set(objs, None, cfg, SQUARE)
        assert {r.label for r in rels} == {"above", "below"}

    def test_cached_distance_is_pixels(self, cfg):
        dims = (2000, 500)
        boxes = [box_at(400, 100), box_at(400, 130)]
        objs = scene_to_objects(boxes, ("chair", "table"))
        dm = scene_depth_map(boxes, [0.5, 0.5], dims)
        rels = build_relation_set(objs, dm, cfg, dims)
        assert rels and all(r.center_distance == pytest.approx(30.0)
                            for r in rels)

    def test_matches_oracle_on_random_scenes(self, rng, cfg):
        for _ in range(50):
            boxes, classes, depths, dims = random_scene(rng)
            objs = scene_to_objects(boxes, classes)
            dm = scene_depth_map(boxes, depths, dims)
            got = [(r.head_index, r.tail_index, r.label, r.modifier)
                   for r in build_relation_set(objs, dm, cfg, dims)]
            want = oracle_relations(boxes, classes, depths, dims)
            assert sorted(got, key=str) == sorted(want, key=str)
