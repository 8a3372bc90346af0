"""uigc: a desk-scale token-map image codec.

Images become grids of discrete patch tokens; one count-based spatial
prior both entropy-codes the tokens that are kept and regenerates, by
argmax, the tokens an edge-preserving checkerboard mask discards.
"""

from . import errors
from .codec import (
    EncodeOptions,
    RoundtripReport,
    decode_image,
    decode_tokens,
    encode_image,
    roundtrip_check,
    simulate_predictions,
)
from .container import ContainerHeader, RatePoint, stats
from .grid import (
    CONTEXT_TEMPLATES,
    MASK,
    RASTER_TEMPLATE,
    TokenMap,
    WindowRect,
    coding_order,
    context_positions,
    group_of,
    raster_order,
    tile_windows,
    window_of,
)
from .mask import (
    checkerboard_template,
    compose_mask,
    downsample_region,
    extract_edges,
    pack_region,
    unpack_region,
    upsample_region,
)
from .prior import (
    ContextModel,
    QuantizedCategorical,
    load_model,
    save_model,
    train_prior,
)
from .rangecoder import RangeDecoder, RangeEncoder
from .sweep import ablation_order_comparison, rd_sweep
from .synthetic import SyntheticSourceSpec, generate_synthetic
from .vq import (
    Codebook,
    center_crop,
    detokenize,
    load_codebook,
    psnr,
    save_codebook,
    tokenize,
    train_codebook,
)

__version__ = "0.1.0"

__all__ = [
    "CONTEXT_TEMPLATES",
    "Codebook",
    "ContainerHeader",
    "ContextModel",
    "EncodeOptions",
    "MASK",
    "QuantizedCategorical",
    "RASTER_TEMPLATE",
    "RangeDecoder",
    "RangeEncoder",
    "RatePoint",
    "RoundtripReport",
    "SyntheticSourceSpec",
    "TokenMap",
    "WindowRect",
    "ablation_order_comparison",
    "center_crop",
    "checkerboard_template",
    "coding_order",
    "compose_mask",
    "context_positions",
    "decode_image",
    "decode_tokens",
    "detokenize",
    "downsample_region",
    "encode_image",
    "errors",
    "extract_edges",
    "generate_synthetic",
    "group_of",
    "load_codebook",
    "load_model",
    "pack_region",
    "psnr",
    "raster_order",
    "rd_sweep",
    "roundtrip_check",
    "save_codebook",
    "save_model",
    "simulate_predictions",
    "stats",
    "tile_windows",
    "tokenize",
    "train_codebook",
    "train_prior",
    "unpack_region",
    "upsample_region",
    "window_of",
]
