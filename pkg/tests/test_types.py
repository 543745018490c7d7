import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as npst

from scenemark import BoundingBox, MarkId, ObjectInstance, RegionMask, Relation, SceneGraph
from scenemark.errors import ValidationError
from scenemark.types import (
    DIRECTIONAL_LABELS,
    INVERSE_LABEL,
    RELATION_LABELS,
    DepthMap,
    ontology_order,
)


class TestRegionMask:
    def test_decode_simple(self):
        # 3x3, foreground is the middle row
        m = RegionMask(width=3, height=3, rle=(3, 3, 3))
        grid = m.decode()
        assert grid.shape == (3, 3)
        assert grid[1].all() and not grid[0].any() and not grid[2].any()

    def test_leading_zero_means_foreground_start(self):
        m = RegionMask(width=2, height=2, rle=(0, 2, 2))
        assert m.decode()[0].all() and not m.decode()[1].any()

    def test_sum_invariant_enforced(self):
        with pytest.raises(ValidationError):
            RegionMask(width=3, height=3, rle=(3, 3))

    def test_negative_count_rejected(self):
        with pytest.raises(ValidationError):
            RegionMask(width=2, height=1, rle=(-1, 3))

    def test_foreground_area(self):
        assert RegionMask(width=3, height=3, rle=(3, 3, 3)).foreground_area() == 3

    def test_from_box_footprint(self):
        m = RegionMask.from_box(BoundingBox(1.2, 0.8, 3.7, 2.0), width=5, height=3)
        grid = m.decode()
        assert grid[0:2, 1:4].all()
        assert grid.sum() == 2 * 3

    @given(grid=npst.arrays(dtype=bool, shape=st.tuples(
        st.integers(1, 12), st.integers(1, 12))))
    @settings(max_examples=200)
    def test_encode_decode_round_trip(self, grid):
        mask = RegionMask.encode(grid)
        assert (mask.decode() == grid).all()
        assert sum(mask.rle) == grid.size


class TestMarkId:
    def test_textual_form(self):
        assert MarkId(3, "couch").textual == "couch_3"

    def test_render_styles(self):
        m = MarkId(7, "lamp")
        assert m.render("numeric") == "7"
        assert m.render("textual") == "lamp_7"

    def test_zero_rejected(self):
        with pytest.raises(ValidationError):
            MarkId(0, "lamp")


class TestObjectInstance:
    def test_confidence_bounds(self):
        with pytest.raises(ValidationError):
            ObjectInstance("chair", 1.2, BoundingBox(0, 0, 1, 1))

    def test_empty_label_rejected(self):
        with pytest.raises(ValidationError):
            ObjectInstance("", 0.5, BoundingBox(0, 0, 1, 1))


class TestDepthMap:
    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            DepthMap(4, 2, np.zeros((4, 2)))

    def test_range_enforced(self):
        with pytest.raises(ValidationError):
            DepthMap(2, 2, np.full((2, 2), 1.5))

    def test_accepts_list_grid(self):
        d = DepthMap(2, 2, [[0.0, 0.5], [1.0, 0.25]])
        assert d.values.dtype == np.float64


class TestRelation:
    def test_self_loop_rejected(self):
        with pytest.raises(ValidationError):
            Relation(1, 1, "above")

    def test_unknown_label_rejected(self):
        with pytest.raises(ValidationError):
            Relation(0, 1, "inside")

    def test_modifier_only_on_directional(self):
        Relation(0, 1, "left_of", modifier="touching")
        with pytest.raises(ValidationError):
            Relation(0, 1, "near", modifier="touching")
        with pytest.raises(ValidationError):
            Relation(0, 1, "in_front_of", modifier="close")

    def test_qualified_label(self):
        assert Relation(0, 1, "left_of", modifier="touching").qualified_label \
            == "left_of_touching"
        assert Relation(0, 1, "above").qualified_label == "above"

    def test_ontology_order_is_total(self):
        ranks = [ontology_order(lbl) for lbl in RELATION_LABELS]
        assert ranks == sorted(ranks) == list(range(7))

    def test_inverse_table_is_involution(self):
        for label, inv in INVERSE_LABEL.items():
            assert INVERSE_LABEL[inv] == label
        for label in DIRECTIONAL_LABELS:
            assert INVERSE_LABEL[label] != label
        assert INVERSE_LABEL["near"] == "near"


class TestSceneGraph:
    def _objects(self, n):
        return tuple(
            ObjectInstance("chair", 0.9, BoundingBox(i, 0, i + 1, 1))
            for i in range(n)
        )

    def test_endpoint_range_checked(self):
        with pytest.raises(ValidationError):
            SceneGraph(self._objects(2), (Relation(0, 5, "above"),))

    def test_one_relation_per_pair(self):
        with pytest.raises(ValidationError):
            SceneGraph(self._objects(2),
                       (Relation(0, 1, "above"), Relation(1, 0, "below")))

    def test_empty(self):
        assert SceneGraph(()).is_empty
        assert not SceneGraph(self._objects(1)).is_empty
