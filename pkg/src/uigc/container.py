"""On-disk container: fixed header, region payload, range-coded tokens.

Layout (all integers big-endian):

    magic "UIGC1"          5 bytes
    mode                   u8   (0 = nolost, 1 = uigc, 2 = roi)
    alphabet K             u16
    patch P                u8
    window S               u8
    original H, W          u32, u32
    crop top, left         u16, u16
    token rows h, cols w   u16, u16
    codebook id            u64
    prior id               u64
    region payload length  u32
    token payload length   u32
    coded symbol count     u32

54 header bytes total, then the region bytes, then the token bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .errors import CorruptContainer

CONTAINER_MAGIC = b"UIGC1"
HEADER_LEN = 54

MODE_CODES = {"nolost": 0, "uigc": 1, "roi": 2}
MODE_NAMES = {v: k for k, v in MODE_CODES.items()}

_HEADER_FMT = ">BHBBIIHHHHQQIII"  # everything after the magic


@dataclass(frozen=True)
class ContainerHeader:
    mode: str
    alphabet: int
    patch: int
    window: int
    height: int
    width: int
    crop_top: int
    crop_left: int
    token_rows: int
    token_cols: int
    codebook_id: int
    prior_id: int
    region_len: int
    token_len: int
    coded_count: int

    @property
    def cropped_height(self) -> int:
        return self.token_rows * self.patch

    @property
    def cropped_width(self) -> int:
        return self.token_cols * self.patch

    @property
    def cropped_pixels(self) -> int:
        return self.cropped_height * self.cropped_width

    def pack(self) -> bytes:
        return CONTAINER_MAGIC + struct.pack(
            _HEADER_FMT,
            MODE_CODES[self.mode],
            self.alphabet,
            self.patch,
            self.window,
            self.height,
            self.width,
            self.crop_top,
            self.crop_left,
            self.token_rows,
            self.token_cols,
            self.codebook_id,
            self.prior_id,
            self.region_len,
            self.token_len,
            self.coded_count,
        )


def parse_header(data: bytes) -> ContainerHeader:
    if len(data) < HEADER_LEN:
        raise CorruptContainer(f"container shorter than its header: {len(data)} bytes")
    if data[: len(CONTAINER_MAGIC)] != CONTAINER_MAGIC:
        raise CorruptContainer("bad container magic")
    fields = struct.unpack(_HEADER_FMT, data[len(CONTAINER_MAGIC) : HEADER_LEN])
    (
        mode_code,
        alphabet,
        patch,
        window,
        height,
        width,
        crop_top,
        crop_left,
        rows,
        cols,
        cb_id,
        pr_id,
        region_len,
        token_len,
        coded,
    ) = fields
    if mode_code not in MODE_NAMES:
        raise CorruptContainer(f"unknown mode code {mode_code}")
    hdr = ContainerHeader(
        MODE_NAMES[mode_code],
        alphabet,
        patch,
        window,
        height,
        width,
        crop_top,
        crop_left,
        rows,
        cols,
        cb_id,
        pr_id,
        region_len,
        token_len,
        coded,
    )
    if alphabet < 2 or patch < 2 or window < 2 or window % 2:
        raise CorruptContainer("degenerate header parameters")
    if rows < 1 or cols < 1:
        raise CorruptContainer("empty token map")
    if rows * patch > height or cols * patch > width:
        raise CorruptContainer("token dimensions exceed the source image")
    if crop_top != (height - rows * patch) // 2 or crop_left != (
        width - cols * patch
    ) // 2:
        raise CorruptContainer("crop offsets are not centered")
    if coded > rows * cols:
        raise CorruptContainer("coded symbol count exceeds the grid")
    return hdr


def split_container(data: bytes) -> tuple[ContainerHeader, bytes, bytes]:
    hdr = parse_header(data)
    total = HEADER_LEN + hdr.region_len + hdr.token_len
    if len(data) != total:
        raise CorruptContainer(f"container is {len(data)} bytes, header says {total}")
    region = data[HEADER_LEN : HEADER_LEN + hdr.region_len]
    tokens = data[HEADER_LEN + hdr.region_len :]
    return hdr, region, tokens


@dataclass(frozen=True)
class RatePoint:
    """Exact bit accounting; bpp divides by the cropped pixel count."""

    bpp: float
    header_bits: int
    region_bits: int
    token_bits: int
    coded_symbols: int
    masked_tokens: int

    @property
    def total_bits(self) -> int:
        return self.header_bits + self.region_bits + self.token_bits


def stats(data: bytes) -> RatePoint:
    hdr, region, tokens = split_container(data)
    total_bits = 8 * len(data)
    return RatePoint(
        bpp=total_bits / hdr.cropped_pixels,
        header_bits=8 * HEADER_LEN,
        region_bits=8 * len(region),
        token_bits=8 * len(tokens),
        coded_symbols=hdr.coded_count,
        masked_tokens=hdr.token_rows * hdr.token_cols - hdr.coded_count,
    )
