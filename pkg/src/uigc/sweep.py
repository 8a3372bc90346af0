"""Evaluation harness: the order ablation and rate-distortion sweeps.

The ablation trains the multi-stage and raster-order variants on identical
synthetic corpora at equal table budgets, applies the checkerboard mask to
held-out maps, and compares kept-token code length with masked-token argmax
accuracy. Sweeps run the full codec over an image-by-codebook-by-mode grid
and emit deterministic CSV/JSON reports.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, replace
from statistics import median

import numpy as np

from .codec import EncodeOptions, decode_tokens, encode_image
from .container import stats
from .errors import CodecError
from .grid import MASK, TokenMap, window_lookup
from .mask import checkerboard_template
from .prior import ContextModel, train_prior
from .synthetic import SyntheticSourceSpec, generate_synthetic
from .vq import center_crop, detokenize, psnr

DEFAULT_ABLATION_SPEC = SyntheticSourceSpec(
    seed=0, height=36, width=36, alphabet=4, regions=10, concentration=1.0, flip=0.02
)


# --------------------------------------------------------------- ablation

@dataclass(frozen=True)
class AblationRow:
    seed: int
    mst_bits_per_token: float
    rt_bits_per_token: float
    mst_masked_accuracy: float
    rt_masked_accuracy: float


@dataclass(frozen=True)
class AblationReport:
    rows: tuple[AblationRow, ...]
    median_mst_bits: float
    median_rt_bits: float
    median_mst_accuracy: float
    median_rt_accuracy: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "rows": [asdict(r) for r in self.rows],
                "median_mst_bits": self.median_mst_bits,
                "median_rt_bits": self.median_rt_bits,
                "median_mst_accuracy": self.median_mst_accuracy,
                "median_rt_accuracy": self.median_rt_accuracy,
            },
            sort_keys=True,
            indent=2,
        )


def _masked_accuracy(model: ContextModel, tokens: TokenMap, keep: np.ndarray):
    """Fraction of discarded cells whose argmax matches the true token."""
    zm = tokens.cells.copy()
    zm[keep == 0] = MASK
    lookup = window_lookup(tokens.height, tokens.width, model.window)
    hits = 0
    total = 0
    for (i, j), _stage in model.order_entries(tokens.height, tokens.width):
        if keep[i, j]:
            continue
        dist = model.predict(zm, (i, j), lookup(i, j))
        hits += int(dist.argmax() == int(tokens.cells[i, j]))
        total += 1
    return hits, total


def ablation_order_comparison(
    base_spec: SyntheticSourceSpec = DEFAULT_ABLATION_SPEC,
    seeds: int = 20,
    table_budget: int | None = None,
    train_maps: int = 16,
    test_maps: int = 6,
    mask_trials: int = 4,
    window: int = 18,
) -> AblationReport:
    """Multi-stage vs raster order at equal table budgets, per seed."""
    if seeds < 1:
        raise ValueError("need at least one seed")
    rows = []
    for s in range(seeds):
        train = [
            generate_synthetic(replace(base_spec, seed=base_spec.seed + 100_000 * s + m))
            for m in range(train_maps)
        ]
        test = [
            generate_synthetic(
                replace(base_spec, seed=base_spec.seed + 100_000 * s + 50_000 + m)
            )
            for m in range(test_maps)
        ]
        models = {
            variant: train_prior(
                train,
                variant=variant,
                window=window,
                mask_trials=mask_trials,
                seed=s,
                table_cap=table_budget,
            )
            for variant in ("mst", "rt")
        }
        bits = {}
        acc = {}
        for variant, model in models.items():
            keep_bits = []
            hits = 0
            total = 0
            for tm in test:
                keep = checkerboard_template(tm.height, tm.width)
                keep_bits.append(model.cross_entropy(tm, keep))
                h, t = _masked_accuracy(model, tm, keep)
                hits += h
                total += t
            bits[variant] = sum(keep_bits) / len(keep_bits)
            acc[variant] = hits / total if total else 1.0
        rows.append(
            AblationRow(
                seed=s,
                mst_bits_per_token=bits["mst"],
                rt_bits_per_token=bits["rt"],
                mst_masked_accuracy=acc["mst"],
                rt_masked_accuracy=acc["rt"],
            )
        )
    return AblationReport(
        rows=tuple(rows),
        median_mst_bits=median(r.mst_bits_per_token for r in rows),
        median_rt_bits=median(r.rt_bits_per_token for r in rows),
        median_mst_accuracy=median(r.mst_masked_accuracy for r in rows),
        median_rt_accuracy=median(r.rt_masked_accuracy for r in rows),
    )


# ------------------------------------------------------------------ sweeps

_CSV_COLUMNS = (
    "file",
    "codebook_k",
    "mode",
    "status",
    "bpp",
    "psnr_db",
    "coded_symbols",
    "masked_tokens",
    "bits_per_token",
)


@dataclass
class EvalRow:
    file: str
    codebook_k: int
    mode: str
    status: str = "ok"
    bpp: float = math.nan
    psnr_db: float = math.nan
    coded_symbols: int = 0
    masked_tokens: int = 0
    bits_per_token: float = math.nan


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)

    def medians(self) -> dict:
        out = {}
        for key in sorted({(r.codebook_k, r.mode) for r in self.rows if r.status == "ok"}):
            group = [r for r in self.rows if (r.codebook_k, r.mode) == key]
            out[f"k{key[0]}_{key[1]}"] = {
                "bpp": median(r.bpp for r in group),
                "psnr_db": median(r.psnr_db for r in group),
            }
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")  # RFC 4180
        writer.writerow(_CSV_COLUMNS)
        for r in sorted(self.rows, key=lambda r: (r.file, r.codebook_k, r.mode)):
            writer.writerow(
                [
                    r.file,
                    r.codebook_k,
                    r.mode,
                    r.status,
                    _fmt(r.bpp),
                    _fmt(r.psnr_db),
                    r.coded_symbols,
                    r.masked_tokens,
                    _fmt(r.bits_per_token),
                ]
            )
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [
            asdict(r)
            for r in sorted(self.rows, key=lambda r: (r.file, r.codebook_k, r.mode))
        ]
        for row in rows:
            for k, v in row.items():
                if isinstance(v, float):
                    row[k] = _fmt(v)
        return json.dumps(
            {"rows": rows, "medians": _fmt_tree(self.medians())},
            sort_keys=True,
            indent=2,
        )


def _fmt(x: float):
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        if math.isinf(x):
            return "inf"
        return f"{x:.6f}"
    return x


def _fmt_tree(tree):
    return {
        k: (_fmt_tree(v) if isinstance(v, dict) else _fmt(v)) for k, v in tree.items()
    }


def rd_sweep(images, codebooks, priors, modes, options=None) -> EvalReport:
    """Cross product of images x codebooks x modes through the full codec.

    ``images`` is a sequence of (name, array) pairs; ``priors`` maps the
    codebook size to a trained model. Failed cells are recorded, not fatal.
    """
    options = options or EncodeOptions()
    report = EvalReport()
    for name, image in images:
        for codebook in codebooks:
            prior = priors[codebook.size]
            for mode in modes:
                row = EvalRow(file=name, codebook_k=codebook.size, mode=mode)
                try:
                    data = encode_image(image, codebook, prior, mode, options)
                    tokens, _keep = decode_tokens(data, codebook, prior)
                    rate = stats(data)
                    cropped, _, _ = center_crop(image, codebook.patch)
                    row.bpp = rate.bpp
                    row.psnr_db = psnr(detokenize(tokens, codebook), cropped)
                    row.coded_symbols = rate.coded_symbols
                    row.masked_tokens = rate.masked_tokens
                    row.bits_per_token = (
                        rate.token_bits / rate.coded_symbols
                        if rate.coded_symbols
                        else math.nan
                    )
                except CodecError as exc:
                    row.status = f"error: {exc}"
                report.rows.append(row)
    return report
