"""Patch-wise vector quantization with a k-means codebook.

Centroids are stored as 16-bit fixed point (value * 256, rounded half up)
so tokenize/detokenize are bit-identical across platforms. Training is
integer-exact: seeded farthest-point init, Lloyd iterations under squared
L2, empty clusters reseeded from the point farthest from its centroid, all
ties broken toward the lowest index. The finished codebook is sorted in
lexicographic centroid order so its content id is canonical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import binio
from .errors import (
    CorruptModel,
    DimensionMismatch,
    IdMismatch,
    ImageTooSmall,
    IndexOutOfRange,
    MaskPresent,
    TooFewPatches,
)
from .grid import TokenMap
from .kernels import assign_nearest

CODEBOOK_MAGIC = b"UIGCCBK1"
_FP = 256  # fixed-point scale


@dataclass
class Codebook:
    patch: int
    centroids: np.ndarray  # (K, 3 * patch^2) uint16, fixed point * 256
    _id: int | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.centroids = np.ascontiguousarray(self.centroids, dtype=np.uint16)
        if self.centroids.ndim != 2:
            raise ValueError("centroids must be a (K, D) array")
        k, d = self.centroids.shape
        if not 1 <= k <= 32768:
            raise ValueError(f"codebook size {k} outside [1, 32768]")
        if self.patch < 2 or d != 3 * self.patch * self.patch:
            raise ValueError("centroid width does not match the patch size")
        if self.centroids.max(initial=0) > 255 * _FP:
            raise ValueError("centroid values exceed 255 in fixed point")

    @property
    def size(self) -> int:
        return self.centroids.shape[0]

    @property
    def codebook_id(self) -> int:
        if self._id is None:
            self._id = binio.fnv1a64(self._body_bytes())
        return self._id

    def _body_bytes(self) -> bytes:
        head = CODEBOOK_MAGIC + binio.pack_u16(self.size) + binio.pack_u8(self.patch)
        return head + self.centroids.astype(">u2").tobytes()

    def to_bytes(self) -> bytes:
        body = self._body_bytes()
        return body + binio.pack_u64(binio.fnv1a64(body))

    @classmethod
    def from_bytes(cls, data: bytes) -> "Codebook":
        r = binio.Reader(data)
        if r.take(len(CODEBOOK_MAGIC)) != CODEBOOK_MAGIC:
            raise CorruptModel("bad codebook magic")
        k = r.u16()
        patch = r.u8()
        if k < 2 or patch < 2:
            raise CorruptModel("bad codebook dimensions")
        raw = r.take(k * 3 * patch * patch * 2)
        stored = r.u64()
        if not r.at_end():
            raise CorruptModel("trailing bytes after codebook id")
        if binio.fnv1a64(data[:-8]) != stored:
            raise IdMismatch("codebook id does not match its contents")
        cents = np.frombuffer(raw, dtype=">u2").astype(np.uint16).reshape(k, -1)
        cb = cls(patch=patch, centroids=cents)
        cb._id = stored
        return cb


def save_codebook(codebook: Codebook, path) -> None:
    with open(path, "wb") as fh:
        fh.write(codebook.to_bytes())


def load_codebook(path) -> Codebook:
    with open(path, "rb") as fh:
        return Codebook.from_bytes(fh.read())


def center_crop(image: np.ndarray, patch: int):
    """Crop to dimensions divisible by ``patch``; returns (view, top, left)."""
    image = np.asarray(image)
    h, w = image.shape[:2]
    if h < patch or w < patch:
        raise ImageTooSmall(f"image {h}x{w} smaller than one {patch}x{patch} patch")
    ch = (h // patch) * patch
    cw = (w // patch) * patch
    top = (h - ch) // 2
    left = (w - cw) // 2
    return image[top : top + ch, left : left + cw], top, left


def extract_patches(image: np.ndarray, patch: int) -> np.ndarray:
    """Row-major (N, 3*patch^2) uint8 patch matrix of a cropped image."""
    cropped, _, _ = center_crop(image, patch)
    h, w = cropped.shape[:2]
    th, tw = h // patch, w // patch
    tiles = cropped.reshape(th, patch, tw, patch, 3).swapaxes(1, 2)
    return np.ascontiguousarray(tiles.reshape(th * tw, 3 * patch * patch))


def _round_div_half_up(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    return (2 * num + den) // (2 * den)


def train_codebook(images, k: int, patch: int = 8, iterations: int = 10, seed: int = 0) -> Codebook:
    """K-means over all patches of ``images``; deterministic given the seed."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    mats = [extract_patches(img, patch) for img in images]
    if not mats:
        raise TooFewPatches("no training images supplied")
    points = np.concatenate(mats, axis=0)
    distinct = np.unique(points, axis=0).shape[0]
    if distinct < k:
        raise TooFewPatches(f"{distinct} distinct patches but k={k}")

    pts_fp = points.astype(np.int64) * _FP
    rng = np.random.default_rng(seed)
    n = pts_fp.shape[0]

    # farthest-point init: seeded first pick, then max-min distance, ties low
    first = int(rng.integers(n))
    cents = np.empty((k, pts_fp.shape[1]), dtype=np.int64)
    cents[0] = pts_fp[first]
    best = _sq_dist_to(pts_fp, cents[0])
    for c in range(1, k):
        nxt = int(np.argmax(best))
        cents[c] = pts_fp[nxt]
        np.minimum(best, _sq_dist_to(pts_fp, cents[c]), out=best)

    for _ in range(iterations):
        assign = assign_nearest(pts_fp, cents)
        counts = np.bincount(assign, minlength=k)
        sums = np.zeros((k, pts_fp.shape[1]), dtype=np.int64)
        np.add.at(sums, assign, points.astype(np.int64))
        nonempty = counts > 0
        cents[nonempty] = _round_div_half_up(
            sums[nonempty] * _FP, counts[nonempty, None]
        )
        if not nonempty.all():
            spread = pts_fp - cents[assign]
            dist_own = np.einsum("nd,nd->n", spread, spread)
            order = np.argsort(-dist_own, kind="stable")  # ties to lowest index
            cursor = 0
            for c in np.flatnonzero(~nonempty):
                cents[c] = pts_fp[order[cursor]]
                cursor += 1

    order = np.lexsort(cents.T[::-1])
    return Codebook(patch=patch, centroids=cents[order].astype(np.uint16))


def _sq_dist_to(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    diff = points - center[None, :]
    return np.einsum("nd,nd->n", diff, diff)


def tokenize(image: np.ndarray, codebook: Codebook) -> TokenMap:
    """Map each patch of the center-cropped image to its nearest centroid."""
    cropped, _, _ = center_crop(image, codebook.patch)
    h, w = cropped.shape[:2]
    th, tw = h // codebook.patch, w // codebook.patch
    pts = extract_patches(cropped, codebook.patch).astype(np.int64) * _FP
    assign = assign_nearest(pts, codebook.centroids.astype(np.int64))
    return TokenMap(assign.reshape(th, tw), codebook.size)


def detokenize(tokens: TokenMap, codebook: Codebook) -> np.ndarray:
    """Paint each cell with its centroid patch; rounds fixed point to 8 bit."""
    if tokens.has_mask():
        raise MaskPresent("cannot detokenize a map with MASK cells")
    if int(tokens.cells.max()) >= codebook.size:
        raise IndexOutOfRange("token index exceeds codebook size")
    p = codebook.patch
    pixels = ((codebook.centroids.astype(np.int64) + _FP // 2) >> 8).astype(np.uint8)
    tiles = pixels[tokens.cells].reshape(tokens.height, tokens.width, p, p, 3)
    return np.ascontiguousarray(
        tiles.swapaxes(1, 2).reshape(tokens.height * p, tokens.width * p, 3)
    )


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB; math.inf for identical images."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape {a.shape} vs {b.shape}")
    diff = a.astype(np.int64) - b.astype(np.int64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 * 255.0 / mse)
