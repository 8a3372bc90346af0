"""End-to-end pipeline: mask, skip-code kept tokens, regenerate the rest.

The same prior drives both directions. Encoding forms the masked map,
walks the model's coding order, and range-encodes the true token wherever
the mask keeps it; discarded positions cost no bits. Decoding walks the
identical order querying the prior exactly once per position: kept
positions are entropy-decoded, discarded ones take the argmax of the very
distribution the coder would have used. Context cells always show the
masked map (MASK at discarded positions, never generated values), so both
sides stay in lockstep by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mask as maskmod
from .container import (
    ContainerHeader,
    MODE_CODES,
    RatePoint,
    split_container,
    stats,
)
from .errors import IdMismatch, RoiDimensionMismatch
from .grid import MASK, TokenMap, window_lookup
from .prior import ContextModel
from .rangecoder import RangeDecoder, RangeEncoder
from .vq import Codebook, center_crop, detokenize, psnr, tokenize


@dataclass
class EncodeOptions:
    """Knobs for mask construction; defaults follow the CLI."""

    edge_percentile: float = 90.0
    edge_cell_threshold: float = 0.05
    roi: np.ndarray | None = None
    roi_drop_edges: bool = False


def _check_pair(codebook: Codebook, prior: ContextModel) -> None:
    if codebook.size != prior.alphabet:
        raise IdMismatch(
            f"codebook size {codebook.size} != prior alphabet {prior.alphabet}"
        )


def build_mask(
    cropped: np.ndarray,
    token_shape: tuple[int, int],
    mode: str,
    patch: int,
    options: EncodeOptions,
) -> tuple[np.ndarray, bytes]:
    """Keep-mask plus the transported region payload for one image."""
    h, w = token_shape
    if mode == "nolost":
        return np.ones((h, w), dtype=np.uint8), b""
    if mode == "roi":
        if options.roi is None:
            raise RoiDimensionMismatch("roi mode needs an ROI grid")
        roi = np.asarray(options.roi)
        if roi.shape != (h, w):
            raise RoiDimensionMismatch(
                f"ROI grid {roi.shape} does not match token map {(h, w)}"
            )
    elif options.roi is not None:
        raise ValueError("ROI grid supplied outside roi mode")

    if mode == "roi" and options.roi_drop_edges:
        preserved = np.zeros((h, w), dtype=np.uint8)
    else:
        preserved = maskmod.extract_edges(
            cropped,
            options.edge_percentile,
            options.edge_cell_threshold,
            patch,
        )
    if mode == "roi":
        preserved = preserved | (roi != 0).astype(np.uint8)
    low = maskmod.downsample_region(preserved)
    payload = maskmod.pack_region(low)
    rebuilt = maskmod.upsample_region(low, h, w)
    keep = maskmod.compose_mask(maskmod.checkerboard_template(h, w), rebuilt)
    return keep, payload


def _mask_from_container(hdr: ContainerHeader, region: bytes) -> np.ndarray:
    h, w = hdr.token_rows, hdr.token_cols
    if hdr.mode == "nolost":
        return np.ones((h, w), dtype=np.uint8)
    low = maskmod.unpack_region(region, ((h + 1) // 2, (w + 1) // 2))
    rebuilt = maskmod.upsample_region(low, h, w)
    return maskmod.compose_mask(maskmod.checkerboard_template(h, w), rebuilt)


def encode_image(
    image: np.ndarray,
    codebook: Codebook,
    prior: ContextModel,
    mode: str = "uigc",
    options: EncodeOptions | None = None,
) -> bytes:
    """Compress ``image`` into a container byte string."""
    if mode not in MODE_CODES:
        raise ValueError(f"unknown mode {mode!r}")
    options = options or EncodeOptions()
    _check_pair(codebook, prior)
    image = np.asarray(image, dtype=np.uint8)
    cropped, top, left = center_crop(image, codebook.patch)
    tokens = tokenize(cropped, codebook)
    h, w = tokens.height, tokens.width
    keep, region = build_mask(cropped, (h, w), mode, codebook.patch, options)

    zm = tokens.cells.copy()
    zm[keep == 0] = MASK
    lookup = window_lookup(h, w, prior.window)
    encoder = RangeEncoder()
    for (i, j), _stage in prior.order_entries(h, w):
        if keep[i, j]:
            dist = prior.predict(zm, (i, j), lookup(i, j))
            encoder.encode(dist, int(zm[i, j]))
    payload = encoder.finish()

    header = ContainerHeader(
        mode=mode,
        alphabet=codebook.size,
        patch=codebook.patch,
        window=prior.window,
        height=image.shape[0],
        width=image.shape[1],
        crop_top=top,
        crop_left=left,
        token_rows=h,
        token_cols=w,
        codebook_id=codebook.codebook_id,
        prior_id=prior.model_id,
        region_len=len(region),
        token_len=len(payload),
        coded_count=int(keep.sum()),
    )
    return header.pack() + region + payload


def _verify_ids(hdr: ContainerHeader, codebook: Codebook, prior: ContextModel) -> None:
    if hdr.codebook_id != codebook.codebook_id:
        raise IdMismatch("container was encoded with a different codebook")
    if hdr.prior_id != prior.model_id:
        raise IdMismatch("container was encoded with a different prior")
    if hdr.alphabet != codebook.size or hdr.patch != codebook.patch:
        raise IdMismatch("codebook geometry differs from the container header")
    if hdr.window != prior.window or hdr.alphabet != prior.alphabet:
        raise IdMismatch("prior geometry differs from the container header")


def decode_tokens(
    data: bytes, codebook: Codebook, prior: ContextModel
) -> tuple[TokenMap, np.ndarray]:
    """Recover the full token map and the keep-mask from a container."""
    hdr, region, payload = split_container(data)
    _verify_ids(hdr, codebook, prior)
    h, w = hdr.token_rows, hdr.token_cols
    keep = _mask_from_container(hdr, region)
    context = np.full((h, w), MASK, dtype=np.int32)
    out = np.empty((h, w), dtype=np.int32)
    coded = np.zeros((h, w), dtype=bool)
    lookup = window_lookup(h, w, prior.window)
    decoder = RangeDecoder(payload)
    for (i, j), _stage in prior.order_entries(h, w):
        dist = prior.predict(context, (i, j), lookup(i, j), coded)
        if keep[i, j]:
            symbol = decoder.decode(dist)
            context[i, j] = symbol
            out[i, j] = symbol
        else:
            out[i, j] = dist.argmax()
        coded[i, j] = True
    return TokenMap(out, hdr.alphabet), keep


def decode_image(
    data: bytes, codebook: Codebook, prior: ContextModel
) -> tuple[np.ndarray, TokenMap]:
    """Decode a container into an image and its regenerated token map."""
    tokens, _ = decode_tokens(data, codebook, prior)
    return detokenize(tokens, codebook), tokens


def simulate_predictions(
    tokens: TokenMap, keep: np.ndarray, prior: ContextModel
) -> TokenMap:
    """Encoder-side replay of the decoder: argmax at every discarded cell.

    This is the independent oracle for masked-position agreement; it never
    touches the range coder.
    """
    h, w = tokens.height, tokens.width
    zm = tokens.cells.copy()
    zm[np.asarray(keep) == 0] = MASK
    out = tokens.cells.copy()
    lookup = window_lookup(h, w, prior.window)
    for (i, j), _stage in prior.order_entries(h, w):
        if not keep[i, j]:
            dist = prior.predict(zm, (i, j), lookup(i, j))
            out[i, j] = dist.argmax()
    return TokenMap(out, tokens.alphabet)


@dataclass
class RoundtripReport:
    mode: str
    kept_exact: float
    masked_match: float
    psnr_db: float
    rate: RatePoint

    def ok(self) -> bool:
        return self.kept_exact == 1.0 and self.masked_match == 1.0


def roundtrip_check(
    image: np.ndarray,
    codebook: Codebook,
    prior: ContextModel,
    mode: str = "uigc",
    options: EncodeOptions | None = None,
) -> RoundtripReport:
    """Encode then decode, checking the codec's own contracts."""
    options = options or EncodeOptions()
    image = np.asarray(image, dtype=np.uint8)
    data = encode_image(image, codebook, prior, mode, options)
    tokens_out, keep = decode_tokens(data, codebook, prior)

    cropped, _, _ = center_crop(image, codebook.patch)
    original = tokenize(cropped, codebook)
    kept_positions = keep != 0
    kept_total = int(kept_positions.sum())
    kept_hits = int(
        (tokens_out.cells[kept_positions] == original.cells[kept_positions]).sum()
    )

    expected = simulate_predictions(original, keep, prior)
    masked_positions = keep == 0
    masked_total = int(masked_positions.sum())
    masked_hits = int(
        (tokens_out.cells[masked_positions] == expected.cells[masked_positions]).sum()
    )

    decoded_image = detokenize(tokens_out, codebook)
    return RoundtripReport(
        mode=mode,
        kept_exact=kept_hits / kept_total if kept_total else 1.0,
        masked_match=masked_hits / masked_total if masked_total else 1.0,
        psnr_db=psnr(decoded_image, cropped),
        rate=stats(data),
    )
