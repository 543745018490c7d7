"""16-bit binary PGM round-trip for relative depth maps.

The wire format is ``P5`` with maxval 65535; stored value / 65535 is the
normalized depth, higher meaning nearer to the camera. Sample bytes are
big-endian per the PGM standard.
"""

from __future__ import annotations

import numpy as np

from .errors import ParseError, ValidationError
from .types import DepthMap

PGM_MAXVAL = 65535


def _tokenize_header(data: bytes):
    """Yield (token, end_offset) skipping whitespace and # comments."""
    i = 0
    n = len(data)
    while i < n:
        c = data[i:i + 1]
        if c.isspace():
            i += 1
            continue
        if c == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < n and not data[i:i + 1].isspace():
            i += 1
        yield data[start:i], i
        i += 1  # single whitespace after a token


def parse_depth_pgm(data: bytes, expected_dims: tuple[int, int] | None = None) -> DepthMap:
    """Parse a 16-bit P5 file into a DepthMap, checking dimensions."""
    tokens = _tokenize_header(data)
    try:
        magic, _ = next(tokens)
        if magic != b"P5":
            raise ParseError(f"not a binary PGM (magic {magic!r})", offset=0)
        (width_tok, _), (height_tok, _), (maxval_tok, end) = (
            next(tokens), next(tokens), next(tokens))
    except StopIteration:
        raise ParseError("truncated PGM header", offset=len(data)) from None
    try:
        width, height, maxval = int(width_tok), int(height_tok), int(maxval_tok)
    except ValueError:
        raise ParseError("non-numeric PGM header field", offset=end) from None
    if maxval != PGM_MAXVAL:
        raise ValidationError(f"maxval must be {PGM_MAXVAL}, got {maxval}", field="maxval")
    if expected_dims is not None and (width, height) != tuple(expected_dims):
        raise ValidationError(
            f"depth map is {width}x{height}, image is "
            f"{expected_dims[0]}x{expected_dims[1]}",
            field="dimensions",
        )
    # `end` indexes the char right after the maxval token; one whitespace
    # byte separates the header from the raster.
    raster = data[end + 1:]
    expected_bytes = width * height * 2
    if len(raster) < expected_bytes:
        raise ParseError(
            f"raster holds {len(raster)} bytes, expected {expected_bytes}",
            offset=end + 1,
        )
    values = np.frombuffer(raster[:expected_bytes], dtype=">u2").astype(np.float64)
    return DepthMap(width=width, height=height,
                    values=(values / PGM_MAXVAL).reshape(height, width))


def load_depth_pgm(path, expected_dims: tuple[int, int] | None = None) -> DepthMap:
    with open(path, "rb") as fh:
        return parse_depth_pgm(fh.read(), expected_dims)


def dump_depth_pgm(depth: DepthMap) -> bytes:
    """Serialize a DepthMap back to 16-bit P5 bytes."""
    header = f"P5\n{depth.width} {depth.height}\n{PGM_MAXVAL}\n".encode("ascii")
    raster = np.rint(depth.values * PGM_MAXVAL).astype(">u2").tobytes()
    return header + raster
