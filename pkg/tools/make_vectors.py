"""Regenerate the golden vectors checked into vectors/.

Run from the repository root:

    python tools/make_vectors.py

Outputs are deterministic; rerunning must produce byte-identical files.
"""

import hashlib
import json
from pathlib import Path

import numpy as np

import uigc
from uigc.kernels import TOTAL, quantize_distribution
from uigc.prior import QuantizedCategorical

ROOT = Path(__file__).resolve().parent.parent
VECTORS = ROOT / "vectors"


def coder_vectors():
    cases = []
    rng = np.random.default_rng(2024)
    for name, k, n in [("k2", 2, 64), ("k16", 16, 256), ("k256", 256, 512)]:
        dists = [
            quantize_distribution(rng.integers(0, 900, k).astype(np.int64)).tolist()
            for _ in range(4)
        ]
        dist_index = rng.integers(0, 4, n).tolist()
        symbols = rng.integers(0, k, n).tolist()
        enc = uigc.RangeEncoder()
        for di, s in zip(dist_index, symbols):
            enc.encode(QuantizedCategorical(np.array(dists[di], dtype=np.int64)), s)
        cases.append(
            {
                "name": name,
                "dists": dists,
                "dist_index": dist_index,
                "symbols": symbols,
                "payload_hex": enc.finish().hex(),
            }
        )
    payload = json.dumps({"total": TOTAL, "cases": cases}, sort_keys=True, indent=1)
    (VECTORS / "coder_vectors.json").write_text(payload + "\n")


def _suite_image(seed, size=96):
    rng = np.random.default_rng(seed)
    sites = rng.random((5, 2)) * size
    colors = rng.integers(30, 226, size=(5, 3))
    rows = np.arange(size)[:, None, None]
    cols = np.arange(size)[None, :, None]
    dist = (rows - sites[:, 0]) ** 2 + (cols - sites[:, 1]) ** 2
    return colors[np.argmin(dist, axis=2)].astype(np.uint8)


def codec_vectors():
    from uigc import ppm

    images = [_suite_image(s) for s in range(6)]
    codebook = uigc.train_codebook(images, k=16, patch=8, iterations=6, seed=11)
    maps = [uigc.tokenize(img, codebook) for img in images]
    prior = uigc.train_prior(maps, variant="mst", window=18, mask_trials=3, seed=7)

    uigc.save_codebook(codebook, VECTORS / "codebook.cbk")
    uigc.save_model(prior, VECTORS / "prior.mdl")

    sample = _suite_image(77)
    ppm.write_ppm(VECTORS / "sample.ppm", sample)

    expected = {"codebook_id": f"{codebook.codebook_id:016x}",
                "prior_id": f"{prior.model_id:016x}",
                "containers": {}}
    for mode in ("nolost", "uigc"):
        data = uigc.encode_image(sample, codebook, prior, mode)
        (VECTORS / f"sample_{mode}.uigc").write_bytes(data)
        image, tokens = uigc.decode_image(data, codebook, prior)
        expected["containers"][mode] = {
            "container_sha256": hashlib.sha256(data).hexdigest(),
            "decoded_tokens": tokens.cells.tolist(),
            "decoded_image_sha256": hashlib.sha256(image.tobytes()).hexdigest(),
        }
    payload = json.dumps(expected, sort_keys=True, indent=1)
    (VECTORS / "expected_decode.json").write_text(payload + "\n")


def main():
    VECTORS.mkdir(exist_ok=True)
    coder_vectors()
    codec_vectors()
    print(f"wrote vectors to {VECTORS}")


if __name__ == "__main__":
    main()
