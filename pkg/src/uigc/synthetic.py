"""Seeded synthetic token sources with controllable spatial correlation.

A Voronoi tessellation assigns each grid cell a dominant token; positions
draw the dominant with the concentration probability (else a uniform other
symbol) and are then flipped to a uniform other symbol with the flip
probability. Identical specs always produce identical maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import TokenMap


@dataclass(frozen=True)
class SyntheticSourceSpec:
    seed: int
    height: int
    width: int
    alphabet: int
    regions: int
    concentration: float = 1.0
    flip: float = 0.0

    def __post_init__(self):
        if self.regions < 1:
            raise ValueError("need at least one region")
        if self.alphabet < 2:
            raise ValueError("alphabet must be >= 2")
        if not 0.0 <= self.concentration <= 1.0:
            raise ValueError("concentration must be in [0, 1]")
        if not 0.0 <= self.flip <= 1.0:
            raise ValueError("flip probability must be in [0, 1]")


def generate_synthetic(spec: SyntheticSourceSpec) -> TokenMap:
    rng = np.random.default_rng(spec.seed)
    h, w, k = spec.height, spec.width, spec.alphabet

    sites = rng.random((spec.regions, 2)) * np.array([h, w])
    dominant = rng.integers(0, k, size=spec.regions)

    rows = np.arange(h)[:, None, None]
    cols = np.arange(w)[None, :, None]
    dist = (rows - sites[:, 0]) ** 2 + (cols - sites[:, 1]) ** 2
    cell_of = np.argmin(dist, axis=2)  # ties resolve to the lowest site index
    cells = dominant[cell_of].astype(np.int64)

    def scatter(values, prob):
        # replace with a uniformly random *other* symbol where u < prob
        hit = rng.random((h, w)) < prob
        other = (values + 1 + rng.integers(0, k - 1, size=(h, w))) % k
        return np.where(hit, other, values)

    if spec.concentration < 1.0:
        cells = scatter(cells, 1.0 - spec.concentration)
    if spec.flip > 0.0:
        cells = scatter(cells, spec.flip)
    return TokenMap(cells.astype(np.int32), k)
