"""Compare the numba and numpy kernel lanes on representative workloads.

Run from the repository root:

    python benchmarks/bench_kernels.py [--repeats 5]

Both lanes are integer-exact and verified equal before timing.
"""

import argparse
import timeit

import numpy as np

from uigc import kernels


def _workloads(rng):
    sobel_img = rng.integers(0, 256, (512, 512)).astype(np.int64)
    points = rng.integers(0, 255 * 256 + 1, (4096, 192)).astype(np.int64)
    centroids = rng.integers(0, 255 * 256 + 1, (256, 192)).astype(np.int64)
    counts = rng.integers(0, 5000, 256).astype(np.int64)
    return {
        "sobel_magnitude 512x512": (0, (sobel_img,)),
        "assign_nearest 4096x256": (1, (points, centroids)),
        "quantize_distribution k=256": (2, (counts,)),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    numpy_lane = kernels.NUMPY_LANE
    try:
        numba_lane = kernels._build_numba()
    except ImportError:
        print("numba unavailable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    work = _workloads(rng)

    print(f"{'kernel':<32} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, (idx, args_tuple) in work.items():
        np_fn = numpy_lane[idx]
        nb_fn = numba_lane[idx]
        expected = np_fn(*args_tuple)
        got = nb_fn(*args_tuple)  # also triggers JIT compilation
        assert np.array_equal(expected, got), f"lane mismatch in {name}"
        t_np = min(
            timeit.repeat(lambda: np_fn(*args_tuple), number=3, repeat=args.repeats)
        )
        t_nb = min(
            timeit.repeat(lambda: nb_fn(*args_tuple), number=3, repeat=args.repeats)
        )
        print(f"{name:<32} {t_np * 1e3 / 3:>8.2f}ms {t_nb * 1e3 / 3:>8.2f}ms {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
