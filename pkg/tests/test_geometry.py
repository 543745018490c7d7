import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenemark.errors import ConfigError, ValidationError
from scenemark.geometry import (
    BoundingBox,
    box_center,
    box_gap,
    center_distance,
    clamp_box_to_image,
    from_reference_frame,
    iou,
    normalized_center_distance,
    to_reference_frame,
)

from oracles import grid_count_iou

boxes = st.builds(
    lambda x0, y0, w, h: BoundingBox(x0, y0, x0 + w, y0 + h),
    st.floats(0, 500), st.floats(0, 500),
    st.floats(1, 500), st.floats(1, 500),
)


class TestBoundingBox:
    def test_rejects_inverted_x(self):
        with pytest.raises(ValidationError):
            BoundingBox(10, 0, 5, 10)

    def test_rejects_zero_height(self):
        with pytest.raises(ValidationError):
            BoundingBox(0, 5, 10, 5)

    def test_rejects_negative_and_nonfinite(self):
        with pytest.raises(ValidationError):
            BoundingBox(-1, 0, 10, 10)
        with pytest.raises(ValidationError):
            BoundingBox(0, 0, math.inf, 10)
        with pytest.raises(ValidationError):
            BoundingBox(0, math.nan, 10, 10)

    def test_dimensions(self):
        b = BoundingBox(3, 7, 9, 15)
        assert (b.width, b.height, b.area) == (6, 8, 48)


class TestIou:
    def test_identity(self):
        b = BoundingBox(0, 0, 10, 10)
        assert iou(b, b) == 1.0

    def test_disjoint(self):
        assert iou(BoundingBox(0, 0, 10, 10), BoundingBox(20, 20, 30, 30)) == 0.0

    def test_one_pixel_shift(self):
        # inter 99x99, union 2*10000 - 9801
        a = BoundingBox(0, 0, 100, 100)
        b = BoundingBox(1, 1, 101, 101)
        assert iou(a, b) == pytest.approx(9801 / 10199)

    def test_quarter_overlap(self):
        a = BoundingBox(0, 0, 10, 10)
        b = BoundingBox(5, 5, 15, 15)
        assert iou(a, b) == pytest.approx(25 / 175)

    def test_against_grid_oracle(self):
        pairs = [
            ((0, 0, 100, 100), (1, 1, 101, 101)),
            ((0, 0, 50, 80), (25, 40, 75, 120)),
            ((10, 10, 40, 40), (10, 10, 40, 70)),
        ]
        for raw_a, raw_b in pairs:
            expected = grid_count_iou(raw_a, raw_b, step=0.25)
            got = iou(BoundingBox(*raw_a), BoundingBox(*raw_b))
            assert got == pytest.approx(expected, abs=0.01)

    @given(a=boxes, b=boxes)
    @settings(max_examples=300)
    def test_symmetric_and_bounded(self, a, b):
        v = iou(a, b)
        assert v == iou(b, a)
        assert 0.0 <= v <= 1.0

    @given(a=boxes)
    def test_self_iou_is_one(self, a):
        assert iou(a, a) == pytest.approx(1.0)


class TestCenters:
    def test_square(self):
        assert box_center(BoundingBox(0, 0, 10, 10)) == (5, 5)

    def test_rect(self):
        assert box_center(BoundingBox(0, 0, 10, 20)) == (5, 10)

    def test_offset(self):
        assert box_center(BoundingBox(3, 7, 9, 15)) == (6, 11)


class TestReferenceFrame:
    def test_identity_frame(self):
        assert to_reference_frame((500, 500), (1000, 1000)) == (500, 500)

    def test_scaling(self):
        assert to_reference_frame((100, 50), (200, 100)) == (500, 500)

    def test_origin_fixed(self):
        assert to_reference_frame((0, 0), (640, 480)) == (0, 0)

    def test_zero_dims_rejected(self):
        with pytest.raises(ConfigError):
            to_reference_frame((1, 1), (0, 100))

    @given(
        x=st.floats(0, 2000), y=st.floats(0, 2000),
        w=st.integers(1, 4000), h=st.integers(1, 4000),
    )
    def test_round_trip(self, x, y, w, h):
        back = from_reference_frame(to_reference_frame((x, y), (w, h)), (w, h))
        assert back[0] == pytest.approx(x, abs=1e-9)
        assert back[1] == pytest.approx(y, abs=1e-9)


class TestDistances:
    def test_coincident_centers(self):
        a = BoundingBox(0, 0, 10, 10)
        b = BoundingBox(2, 2, 8, 8)
        assert normalized_center_distance(a, b, (100, 100)) == 0.0

    def test_opposite_corners(self):
        a = BoundingBox(0, 1, 2, 3)
        b = BoundingBox(98, 196, 100, 200)
        # centers (1,2) and (99,198): the vector is 0.98 of the diagonal
        d = normalized_center_distance(a, b, (100, 200))
        assert d == pytest.approx(0.98)

    def test_345_triangle(self):
        a = BoundingBox(0, 0.0001, 0.0002, 0.0003)
        b = BoundingBox(299.9999, 399.9999, 300.0001, 400.0001)
        d = normalized_center_distance(a, b, (1000, 1000))
        assert d == pytest.approx(500 / math.sqrt(2_000_000), abs=1e-6)

    @given(a=boxes, b=boxes, scale=st.integers(2, 8))
    @settings(max_examples=100)
    def test_scale_invariance(self, a, b, scale):
        big_a = BoundingBox(a.x_min * scale, a.y_min * scale,
                            a.x_max * scale, a.y_max * scale)
        big_b = BoundingBox(b.x_min * scale, b.y_min * scale,
                            b.x_max * scale, b.y_max * scale)
        d1 = normalized_center_distance(a, b, (1000, 1000))
        d2 = normalized_center_distance(big_a, big_b,
                                        (1000 * scale, 1000 * scale))
        assert d1 == pytest.approx(d2, rel=1e-9)

    def test_center_distance_pixels(self):
        a = BoundingBox(0, 0, 2, 2)
        b = BoundingBox(2, 4, 4, 4.0001)
        assert center_distance(a, b) == pytest.approx(math.hypot(2, 3), abs=1e-3)


class TestBoxGap:
    def test_overlapping_is_zero(self):
        assert box_gap(BoundingBox(0, 0, 10, 10), BoundingBox(5, 5, 15, 15)) == 0.0

    def test_horizontal_gap(self):
        assert box_gap(BoundingBox(0, 0, 10, 10), BoundingBox(14, 0, 20, 10)) == 4.0

    def test_diagonal_gap_takes_max(self):
        g = box_gap(BoundingBox(0, 0, 10, 10), BoundingBox(13, 17, 20, 25))
        assert g == 7.0

    def test_symmetric(self):
        a, b = BoundingBox(0, 0, 4, 4), BoundingBox(30, 2, 35, 6)
        assert box_gap(a, b) == box_gap(b, a)


class TestClampBox:
    def test_overshoot_clamped(self):
        b = clamp_box_to_image((-5, -5, 50, 50), (40, 40))
        assert (b.x_min, b.y_min, b.x_max, b.y_max) == (0, 0, 40, 40)

    def test_inside_untouched(self):
        b = clamp_box_to_image((1, 2, 3, 4), (10, 10))
        assert (b.x_min, b.y_min, b.x_max, b.y_max) == (1, 2, 3, 4)

    def test_fully_outside_rejected(self):
        with pytest.raises(ValidationError):
            clamp_box_to_image((50, 50, 60, 60), (40, 40))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValidationError):
            clamp_box_to_image((0, 0, math.nan, 10), (40, 40))
