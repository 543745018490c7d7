import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scenemark import dump_depth_pgm, load_depth_pgm, parse_depth_pgm
from scenemark.errors import ParseError, ValidationError
from scenemark.types import DepthMap


def test_round_trip_exact():
    values = np.linspace(0, 1, 12).reshape(3, 4)
    # snap to representable 16-bit levels first
    values = np.round(values * 65535) / 65535
    depth = DepthMap(4, 3, values)
    again = parse_depth_pgm(dump_depth_pgm(depth))
    assert again.width == 4 and again.height == 3
    assert np.array_equal(again.values, values)


def test_big_endian_layout():
    depth = DepthMap(2, 1, np.array([[1.0, 0.0]]))
    raw = dump_depth_pgm(depth)
    assert raw.startswith(b"P5\n2 1\n65535\n")
    assert raw.endswith(b"\xff\xff\x00\x00")


def test_header_comments_tolerated():
    data = b"P5\n# produced by a depth backend\n2 2\n65535\n" + b"\x00" * 8
    depth = parse_depth_pgm(data)
    assert depth.values.shape == (2, 2)
    assert depth.values.max() == 0.0


def test_value_scaling():
    payload = (32768).to_bytes(2, "big") * 4
    depth = parse_depth_pgm(b"P5\n2 2\n65535\n" + payload)
    assert depth.values[0, 0] == pytest.approx(32768 / 65535)


def test_wrong_magic():
    with pytest.raises(ParseError):
        parse_depth_pgm(b"P6\n2 2\n65535\n" + b"\x00" * 8)


def test_wrong_maxval():
    with pytest.raises(ValidationError):
        parse_depth_pgm(b"P5\n2 2\n255\n" + b"\x00" * 4)


def test_truncated_header():
    with pytest.raises(ParseError):
        parse_depth_pgm(b"P5\n2\n")


def test_non_numeric_header():
    with pytest.raises(ParseError):
        parse_depth_pgm(b"P5\ntwo two\n65535\n" + b"\x00" * 8)


def test_short_raster():
    with pytest.raises(ParseError):
        parse_depth_pgm(b"P5\n2 2\n65535\n" + b"\x00" * 7)


def test_dims_mismatch():
    data = b"P5\n2 2\n65535\n" + b"\x00" * 8
    with pytest.raises(ValidationError):
        parse_depth_pgm(data, expected_dims=(4, 4))
    assert parse_depth_pgm(data, expected_dims=(2, 2)).width == 2


def test_load_from_file(tmp_path):
    p = tmp_path / "d.pgm"
    p.write_bytes(dump_depth_pgm(DepthMap(3, 2, np.zeros((2, 3)))))
    assert load_depth_pgm(p).values.shape == (2, 3)


@given(
    w=st.integers(1, 16),
    h=st.integers(1, 16),
    seed=st.integers(0, 2**31),
)
@settings(max_examples=100)
def test_round_trip_random(w, h, seed):
    rng = np.random.default_rng(seed)
    levels = rng.integers(0, 65536, size=(h, w))
    depth = DepthMap(w, h, levels / 65535)
    again = parse_depth_pgm(dump_depth_pgm(depth))
    assert np.array_equal(again.values, depth.values)
