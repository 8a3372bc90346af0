"""Command-line surface; every subcommand is a thin shell over the library.

Exit codes: 0 success, 1 usage error, 2 data error (bad files, mismatched
ids, corrupt streams).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from . import ppm
from .codec import EncodeOptions, decode_image, encode_image, roundtrip_check
from .container import MODE_CODES, stats
from .errors import CodecError
from .prior import load_model, save_model, train_prior
from .sweep import DEFAULT_ABLATION_SPEC, ablation_order_comparison, rd_sweep
from .synthetic import SyntheticSourceSpec, generate_synthetic
from .vq import load_codebook, save_codebook, tokenize, train_codebook

USAGE_EXIT = 1
DATA_EXIT = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _build_parser() -> _Parser:
    parser = _Parser(prog="uigc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train-codebook", help="fit a patch codebook on PPM images")
    p.add_argument("images", nargs="+")
    p.add_argument("--k", type=int, default=64)
    p.add_argument("--patch", type=int, default=8)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train-prior", help="fit the context model on tokenized images")
    p.add_argument("images", nargs="+")
    p.add_argument("--codebook", required=True)
    p.add_argument("--variant", choices=("mst", "rt"), default="mst")
    p.add_argument("--window", type=int, default=18)
    p.add_argument("--mask-trials", type=int, default=4)
    p.add_argument("--threshold", type=int, default=8)
    p.add_argument("--table-budget", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("encode", help="compress a PPM image into a .uigc container")
    p.add_argument("image")
    p.add_argument("--codebook", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--mode", choices=sorted(MODE_CODES), default="uigc")
    p.add_argument("--roi", help="P5 grid at token resolution, nonzero = ROI")
    p.add_argument("--roi-drop-edges", action="store_true")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--edge-percentile", type=float, default=90.0)
    p.add_argument("--edge-cell-threshold", type=float, default=0.05)
    p.add_argument("--out", default=None)

    p = sub.add_parser("decode", help="decompress a .uigc container to PPM")
    p.add_argument("container")
    p.add_argument("--codebook", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("stats", help="print exact bit accounting of a container")
    p.add_argument("container")

    p = sub.add_parser("roundtrip", help="encode+decode and verify codec contracts")
    p.add_argument("image")
    p.add_argument("--codebook", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--mode", choices=sorted(MODE_CODES), default="uigc")
    p.add_argument("--roi")
    p.add_argument("--roi-drop-edges", action="store_true")
    p.add_argument("--edge-percentile", type=float, default=90.0)
    p.add_argument("--edge-cell-threshold", type=float, default=0.05)

    p = sub.add_parser("synth", help="emit a synthetic token map as P5")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--height", type=int, default=36)
    p.add_argument("--width", type=int, default=36)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--regions", type=int, default=6)
    p.add_argument("--concentration", type=float, default=1.0)
    p.add_argument("--flip", type=float, default=0.05)
    p.add_argument("--out", required=True)

    p = sub.add_parser("ablation", help="multi-stage vs raster order on synthetic maps")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--k", type=int, default=DEFAULT_ABLATION_SPEC.alphabet)
    p.add_argument("--height", type=int, default=DEFAULT_ABLATION_SPEC.height)
    p.add_argument("--width", type=int, default=DEFAULT_ABLATION_SPEC.width)
    p.add_argument("--regions", type=int, default=DEFAULT_ABLATION_SPEC.regions)
    p.add_argument("--flip", type=float, default=DEFAULT_ABLATION_SPEC.flip)
    p.add_argument("--table-budget", type=int, default=None)
    p.add_argument("--window", type=int, default=18)
    p.add_argument("--out", default=None)

    p = sub.add_parser("rd-sweep", help="rate-distortion grid over codebook sizes")
    p.add_argument("--images", nargs="+", required=True)
    p.add_argument("--codebooks", nargs="+", required=True)
    p.add_argument("--priors", nargs="+", required=True)
    p.add_argument("--modes", default="nolost,uigc")
    p.add_argument("--edge-percentile", type=float, default=90.0)
    p.add_argument("--edge-cell-threshold", type=float, default=0.05)
    p.add_argument("--out", required=True, help="prefix for .csv and .json reports")
    return parser


def _load_roi(path):
    if path is None:
        return None
    return (ppm.read_pgm(path) != 0).astype(np.uint8)


def _options(args) -> EncodeOptions:
    return EncodeOptions(
        edge_percentile=args.edge_percentile,
        edge_cell_threshold=args.edge_cell_threshold,
        roi=_load_roi(getattr(args, "roi", None)),
        roi_drop_edges=getattr(args, "roi_drop_edges", False),
    )


def _cmd_train_codebook(args) -> int:
    images = [ppm.read_ppm(p) for p in args.images]
    cb = train_codebook(images, args.k, args.patch, args.iterations, args.seed)
    save_codebook(cb, args.out)
    print(f"codebook k={cb.size} patch={cb.patch} id={cb.codebook_id:016x} -> {args.out}")
    return 0


def _cmd_train_prior(args) -> int:
    cb = load_codebook(args.codebook)
    maps = [tokenize(ppm.read_ppm(p), cb) for p in args.images]
    model = train_prior(
        maps,
        variant=args.variant,
        window=args.window,
        mask_trials=args.mask_trials,
        seed=args.seed,
        threshold=args.threshold,
        table_cap=args.table_budget,
    )
    save_model(model, args.out)
    print(
        f"prior variant={model.variant} k={model.alphabet} window={model.window} "
        f"id={model.model_id:016x} -> {args.out}"
    )
    return 0


def _cmd_encode(args) -> int:
    cb = load_codebook(args.codebook)
    prior = load_model(args.prior)
    if args.window is not None and args.window != prior.window:
        raise CodecError(
            f"--window {args.window} does not match the prior's window {prior.window}"
        )
    image = ppm.read_ppm(args.image)
    data = encode_image(image, cb, prior, args.mode, _options(args))
    out = args.out or str(Path(args.image).with_suffix(".uigc"))
    Path(out).write_bytes(data)
    rate = stats(data)
    print(f"{out}: {len(data)} bytes, bpp={rate.bpp:.6f}, coded={rate.coded_symbols}")
    return 0


def _cmd_decode(args) -> int:
    cb = load_codebook(args.codebook)
    prior = load_model(args.prior)
    data = Path(args.container).read_bytes()
    image, _tokens = decode_image(data, cb, prior)
    out = args.out or str(Path(args.container).with_suffix(".ppm"))
    ppm.write_ppm(out, image)
    print(f"{out}: {image.shape[1]}x{image.shape[0]}")
    return 0


def _cmd_stats(args) -> int:
    rate = stats(Path(args.container).read_bytes())
    print(json.dumps(asdict(rate), sort_keys=True, indent=2))
    return 0


def _cmd_roundtrip(args) -> int:
    cb = load_codebook(args.codebook)
    prior = load_model(args.prior)
    image = ppm.read_ppm(args.image)
    report = roundtrip_check(image, cb, prior, args.mode, _options(args))
    psnr_text = "inf" if math.isinf(report.psnr_db) else f"{report.psnr_db:.2f}"
    print(f"mode: {report.mode}")
    print(f"kept-token exactness: {report.kept_exact * 100:.2f}%")
    print(f"masked-token agreement: {report.masked_match * 100:.2f}%")
    print(f"psnr: {psnr_text} dB")
    print(f"bpp: {report.rate.bpp:.6f}")
    if not report.ok():
        print("roundtrip FAILED", file=sys.stderr)
        return DATA_EXIT
    return 0


def _cmd_synth(args) -> int:
    spec = SyntheticSourceSpec(
        seed=args.seed,
        height=args.height,
        width=args.width,
        alphabet=args.k,
        regions=args.regions,
        concentration=args.concentration,
        flip=args.flip,
    )
    tm = generate_synthetic(spec)
    ppm.write_pgm(args.out, tm.cells.astype(np.uint16), maxval=max(255, args.k - 1))
    print(f"{args.out}: {tm.width}x{tm.height}, k={tm.alphabet}")
    return 0


def _cmd_ablation(args) -> int:
    spec = replace(
        DEFAULT_ABLATION_SPEC,
        alphabet=args.k,
        height=args.height,
        width=args.width,
        regions=args.regions,
        flip=args.flip,
    )
    report = ablation_order_comparison(
        spec, seeds=args.seeds, table_budget=args.table_budget, window=args.window
    )
    if args.out:
        Path(args.out).write_text(report.to_json())
    print(f"median bits/token: mst={report.median_mst_bits:.4f} rt={report.median_rt_bits:.4f}")
    print(
        "median masked accuracy: "
        f"mst={report.median_mst_accuracy:.4f} rt={report.median_rt_accuracy:.4f}"
    )
    return 0


def _cmd_rd_sweep(args) -> int:
    codebooks = [load_codebook(p) for p in args.codebooks]
    priors = {}
    for p in args.priors:
        model = load_model(p)
        priors[model.alphabet] = model
    missing = [cb.size for cb in codebooks if cb.size not in priors]
    if missing:
        raise CodecError(f"no prior supplied for codebook sizes {missing}")
    images = [(Path(p).name, ppm.read_ppm(p)) for p in args.images]
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    for m in modes:
        if m not in MODE_CODES:
            raise CodecError(f"unknown mode {m!r}")
    options = EncodeOptions(
        edge_percentile=args.edge_percentile,
        edge_cell_threshold=args.edge_cell_threshold,
    )
    report = rd_sweep(images, codebooks, priors, modes, options)
    Path(args.out + ".csv").write_bytes(report.to_csv().encode())
    Path(args.out + ".json").write_text(report.to_json())
    failed = sum(1 for r in report.rows if r.status != "ok")
    print(f"{len(report.rows)} rows ({failed} failed) -> {args.out}.csv / .json")
    return 0


_COMMANDS = {
    "train-codebook": _cmd_train_codebook,
    "train-prior": _cmd_train_prior,
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "stats": _cmd_stats,
    "roundtrip": _cmd_roundtrip,
    "synth": _cmd_synth,
    "ablation": _cmd_ablation,
    "rd-sweep": _cmd_rd_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CodecError as exc:
        print(f"uigc: {exc}", file=sys.stderr)
        return DATA_EXIT
    except OSError as exc:
        print(f"uigc: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
