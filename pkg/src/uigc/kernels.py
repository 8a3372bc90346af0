"""Hot numeric kernels: numba lane with a pure-numpy fallback.

Lane selection happens once at import time via the ``UIGC_NUMBA`` env var:
``1`` forces the numba lane (ImportError if numba is missing), ``0`` forces
the numpy lane, unset picks numba when importable. Both lanes use integer
arithmetic only and must return bit-identical results; tests/test_kernels.py
asserts equality and benchmarks/bench_kernels.py compares speed.

Kernels:
  sobel_magnitude      |gx|+|gy| of a 3x3 Sobel pair, replicate borders
  assign_nearest       nearest-centroid index under squared L2, ties low
  quantize_distribution add-one smoothing + largest-remainder apportionment
                        to a fixed total of 32768 with a per-symbol floor of 1
"""

from __future__ import annotations

import os

import numpy as np

TOTAL = 1 << 15  # shared by the prior and the range coder


# ---------------------------------------------------------------- numpy lane

def _sobel_magnitude_np(gray: np.ndarray) -> np.ndarray:
    p = np.pad(gray.astype(np.int64), 1, mode="edge")
    gx = (p[:-2, 2:] + 2 * p[1:-1, 2:] + p[2:, 2:]) - (
        p[:-2, :-2] + 2 * p[1:-1, :-2] + p[2:, :-2]
    )
    gy = (p[2:, :-2] + 2 * p[2:, 1:-1] + p[2:, 2:]) - (
        p[:-2, :-2] + 2 * p[:-2, 1:-1] + p[:-2, 2:]
    )
    return np.abs(gx) + np.abs(gy)


def _assign_nearest_np(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    n = points.shape[0]
    out = np.empty(n, dtype=np.int32)
    # chunked so the (n, k, d) broadcast stays within a few MB
    step = max(1, (1 << 21) // max(1, centroids.size))
    for lo in range(0, n, step):
        chunk = points[lo : lo + step]
        diff = chunk[:, None, :] - centroids[None, :, :]
        dist = np.einsum("nkd,nkd->nk", diff, diff)
        out[lo : lo + chunk.shape[0]] = np.argmin(dist, axis=1)
    return out


def _quantize_distribution_np(counts: np.ndarray) -> np.ndarray:
    w = counts.astype(np.int64) + 1
    total_w = int(w.sum())
    scaled = w * TOTAL
    freq = scaled // total_w
    rem = scaled - freq * total_w
    deficit = TOTAL - int(freq.sum())
    if deficit > 0:
        # largest remainder first, ties to the lowest symbol index
        order = np.lexsort((np.arange(w.size), -rem))
        freq[order[:deficit]] += 1
    zeros = np.flatnonzero(freq == 0)
    if zeros.size:
        freq[zeros] = 1
        need = int(zeros.size)
        while need > 0:
            j = int(np.argmax(freq))  # argmax returns the lowest tied index
            freq[j] -= 1
            need -= 1
    return freq


# ---------------------------------------------------------------- numba lane

def _build_numba():
    from numba import njit

    @njit(cache=True)
    def sobel_magnitude(gray):  # pragma: no cover - exercised via lane tests
        h, w = gray.shape
        out = np.empty((h, w), dtype=np.int64)
        for i in range(h):
            im = i - 1 if i > 0 else 0
            ip = i + 1 if i < h - 1 else h - 1
            for j in range(w):
                jm = j - 1 if j > 0 else 0
                jp = j + 1 if j < w - 1 else w - 1
                a = np.int64(gray[im, jm])
                b = np.int64(gray[im, j])
                c = np.int64(gray[im, jp])
                d = np.int64(gray[i, jm])
                f = np.int64(gray[i, jp])
                g = np.int64(gray[ip, jm])
                hh = np.int64(gray[ip, j])
                k = np.int64(gray[ip, jp])
                gx = (c + 2 * f + k) - (a + 2 * d + g)
                gy = (g + 2 * hh + k) - (a + 2 * b + c)
                out[i, j] = abs(gx) + abs(gy)
        return out

    @njit(cache=True)
    def assign_nearest(points, centroids):  # pragma: no cover
        n, d = points.shape
        k = centroids.shape[0]
        out = np.empty(n, dtype=np.int32)
        for i in range(n):
            best = np.int64(-1)
            best_j = 0
            for j in range(k):
                acc = np.int64(0)
                for t in range(d):
                    diff = points[i, t] - centroids[j, t]
                    acc += diff * diff
                if best < 0 or acc < best:
                    best = acc
                    best_j = j
            out[i] = best_j
        return out

    @njit(cache=True)
    def quantize_distribution(counts):  # pragma: no cover
        k = counts.shape[0]
        w = counts.astype(np.int64) + 1
        total_w = np.int64(0)
        for i in range(k):
            total_w += w[i]
        freq = np.empty(k, dtype=np.int64)
        rem = np.empty(k, dtype=np.int64)
        got = np.int64(0)
        for i in range(k):
            scaled = w[i] * TOTAL
            freq[i] = scaled // total_w
            rem[i] = scaled - freq[i] * total_w
            got += freq[i]
        deficit = TOTAL - got
        taken = np.zeros(k, dtype=np.uint8)
        for _ in range(deficit):
            best = np.int64(-1)
            best_i = -1
            for i in range(k):
                if taken[i] == 0 and rem[i] > best:
                    best = rem[i]
                    best_i = i
            freq[best_i] += 1
            taken[best_i] = 1
        need = 0
        for i in range(k):
            if freq[i] == 0:
                freq[i] = 1
                need += 1
        while need > 0:
            best = np.int64(-1)
            best_i = -1
            for i in range(k):
                if freq[i] > best:
                    best = freq[i]
                    best_i = i
            freq[best_i] -= 1
            need -= 1
        return freq

    return sobel_magnitude, assign_nearest, quantize_distribution


_flag = os.environ.get("UIGC_NUMBA", "").strip()
NUMBA_ENABLED = False

if _flag != "0":
    try:
        sobel_magnitude, assign_nearest, quantize_distribution = _build_numba()
        NUMBA_ENABLED = True
    except ImportError:
        if _flag == "1":
            raise

if not NUMBA_ENABLED:
    sobel_magnitude = _sobel_magnitude_np
    assign_nearest = _assign_nearest_np
    quantize_distribution = _quantize_distribution_np

NUMPY_LANE = (_sobel_magnitude_np, _assign_nearest_np, _quantize_distribution_np)
ACTIVE_LANE = (sobel_magnitude, assign_nearest, quantize_distribution)
