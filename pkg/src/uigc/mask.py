"""Edge-preserved checkerboard masking and region transport.

The keep-mask is the OR of three token-resolution grids: the checkerboard
template (anchor groups 0 and 1), the preserved region reconstructed from
its 2x-downsampled transport form, and an optional ROI. The preserved
region travels as a zlib stream of MSB-first packed bits; both coder sides
rebuild the mask from the transported low-resolution grid, so they always
agree byte for byte.

Grids are uint8 arrays holding 0/1; 1 means KEEP.
"""

from __future__ import annotations

import math
import zlib

import numpy as np

from .errors import CorruptRegion, DimensionMismatch, ImageTooSmall
from .kernels import sobel_magnitude

ZLIB_LEVEL = 9


def _as_grid(x) -> np.ndarray:
    g = np.asarray(x)
    if g.ndim != 2:
        raise DimensionMismatch("binary grids must be 2-d")
    return (g != 0).astype(np.uint8)


def extract_edges(
    image: np.ndarray,
    percentile: float = 90.0,
    cell_threshold: float = 0.05,
    patch: int = 8,
) -> np.ndarray:
    """Token-resolution preserved region from gradient magnitude.

    Sobel |gx|+|gy| over the integer luma (borders replicate), thresholded
    strictly above the percentile-q magnitude; a token cell is preserved
    when at least ``cell_threshold`` of its patch pixels exceed it. The
    image is center-cropped to whole patches first, matching the tokenizer.
    """
    if not 0.0 < percentile < 100.0:
        raise ValueError(f"percentile must be in (0, 100), got {percentile}")
    if not 0.0 < cell_threshold <= 1.0:
        raise ValueError(f"cell threshold must be in (0, 1], got {cell_threshold}")
    image = np.asarray(image)
    h, w = image.shape[:2]
    if h < patch or w < patch:
        raise ImageTooSmall(f"image {h}x{w} smaller than one {patch}x{patch} patch")
    ch, cw = (h // patch) * patch, (w // patch) * patch
    top, left = (h - ch) // 2, (w - cw) // 2
    cropped = image[top : top + ch, left : left + cw].astype(np.int64)
    luma = (
        cropped[:, :, 0] * 299 + cropped[:, :, 1] * 587 + cropped[:, :, 2] * 114
    ) // 1000
    mag = sobel_magnitude(luma)
    flat = np.sort(mag, axis=None)
    idx = int(math.floor(percentile / 100.0 * (flat.size - 1)))
    threshold = int(flat[idx])
    exceeds = mag > threshold
    th, tw = ch // patch, cw // patch
    per_cell = exceeds.reshape(th, patch, tw, patch).sum(axis=(1, 3))
    return (per_cell >= cell_threshold * patch * patch).astype(np.uint8)


def downsample_region(region) -> np.ndarray:
    """OR-pool 2x2 blocks; odd dimensions pad with zeros before pooling."""
    region = _as_grid(region)
    h, w = region.shape
    lh, lw = (h + 1) // 2, (w + 1) // 2
    padded = np.zeros((lh * 2, lw * 2), dtype=np.uint8)
    padded[:h, :w] = region
    blocks = padded.reshape(lh, 2, lw, 2)
    return (blocks.max(axis=(1, 3)) != 0).astype(np.uint8)


def upsample_region(low, height: int, width: int) -> np.ndarray:
    """Nearest-neighbor 2x replication cropped to (height, width)."""
    low = _as_grid(low)
    if low.shape != ((height + 1) // 2, (width + 1) // 2):
        raise DimensionMismatch(
            f"low-res grid {low.shape} does not match target {height}x{width}"
        )
    return np.repeat(np.repeat(low, 2, axis=0), 2, axis=1)[:height, :width]


def checkerboard_template(height: int, width: int) -> np.ndarray:
    """Keep-mask of the anchor groups: 1 where the coordinate sum is even."""
    rows = np.arange(height)[:, None]
    cols = np.arange(width)[None, :]
    return (((rows + cols) & 1) == 0).astype(np.uint8)


def compose_mask(template, preserved, roi=None) -> np.ndarray:
    """Final keep-mask: template OR preserved region OR optional ROI."""
    template = _as_grid(template)
    preserved = _as_grid(preserved)
    if template.shape != preserved.shape:
        raise DimensionMismatch("template and preserved region differ in shape")
    out = template | preserved
    if roi is not None:
        roi = _as_grid(roi)
        if roi.shape != template.shape:
            raise DimensionMismatch("ROI grid differs in shape")
        out = out | roi
    return out


def pack_region(low) -> bytes:
    """MSB-first row-major bit packing, then an RFC-1950 zlib stream."""
    low = _as_grid(low)
    packed = np.packbits(low.reshape(-1), bitorder="big").tobytes()
    return zlib.compress(packed, ZLIB_LEVEL)


def unpack_region(data: bytes, shape: tuple[int, int]) -> np.ndarray:
    """Exact inverse of pack_region given the grid dimensions."""
    h, w = shape
    try:
        raw = zlib.decompress(data)
    except zlib.error as exc:
        raise CorruptRegion(f"zlib stream rejected: {exc}") from exc
    expected = (h * w + 7) // 8
    if len(raw) != expected:
        raise CorruptRegion(f"region payload is {len(raw)} bytes, wanted {expected}")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="big")
    return bits[: h * w].reshape(h, w).astype(np.uint8)
