"""Binary netpbm I/O: P6 color images and P5 gray maps.

Writers emit a minimal header with no comments; readers tolerate comments
and arbitrary whitespace. P6 is fixed at 8 bits per channel. P5 supports
maxval up to 65535 (two-byte big-endian samples), used for ROI grids and
token-map dumps.
"""

from __future__ import annotations

import numpy as np

from .errors import ImageFormatError


def _parse_header(data: bytes, magic: bytes, fields: int):
    if not data.startswith(magic):
        raise ImageFormatError(f"expected {magic!r} header")
    pos = len(magic)
    values = []
    while len(values) < fields:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos] == ord("#"):
            while pos < len(data) and data[pos] != ord("\n"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated netpbm header")
        try:
            values.append(int(data[start:pos]))
        except ValueError as exc:
            raise ImageFormatError("malformed netpbm header") from exc
    # exactly one whitespace byte separates header from raster
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise ImageFormatError("missing raster separator")
    return values, pos + 1


def read_ppm(path) -> np.ndarray:
    """Load a binary P6 file as an (H, W, 3) uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    (width, height, maxval), offset = _parse_header(data, b"P6", 3)
    if maxval != 255:
        raise ImageFormatError(f"only 8-bit P6 supported, maxval={maxval}")
    if width < 1 or height < 1:
        raise ImageFormatError("empty image")
    need = width * height * 3
    raster = data[offset : offset + need]
    if len(raster) != need:
        raise ImageFormatError("P6 raster truncated")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3).copy()


def write_ppm(path, image: np.ndarray) -> None:
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ImageFormatError("P6 writer needs an (H, W, 3) array")
    h, w = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(image.tobytes())


def read_pgm(path) -> np.ndarray:
    """Load a binary P5 file as an (H, W) array (uint8 or uint16)."""
    with open(path, "rb") as fh:
        data = fh.read()
    (width, height, maxval), offset = _parse_header(data, b"P5", 3)
    if not 1 <= maxval <= 65535:
        raise ImageFormatError(f"bad P5 maxval {maxval}")
    if width < 1 or height < 1:
        raise ImageFormatError("empty image")
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    need = width * height * dtype.itemsize if maxval >= 256 else width * height
    raster = data[offset : offset + need]
    if len(raster) != need:
        raise ImageFormatError("P5 raster truncated")
    out = np.frombuffer(raster, dtype=dtype).reshape(height, width)
    return out.astype(np.uint16) if maxval >= 256 else out.copy()


def write_pgm(path, grid: np.ndarray, maxval: int | None = None) -> None:
    grid = np.asarray(grid)
    if grid.ndim != 2:
        raise ImageFormatError("P5 writer needs a 2-d array")
    if maxval is None:
        maxval = 255 if grid.size == 0 else max(255, int(grid.max()))
    if not 1 <= maxval <= 65535:
        raise ImageFormatError(f"bad P5 maxval {maxval}")
    if grid.size and (grid.min() < 0 or grid.max() > maxval):
        raise ImageFormatError("grid values exceed maxval")
    h, w = grid.shape
    data = (
        grid.astype(np.uint8).tobytes()
        if maxval < 256
        else grid.astype(">u2").tobytes()
    )
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n%d\n" % (w, h, maxval))
        fh.write(data)
