"""Count-based backoff context model driving both coding and generation.

The model serves one purpose wherever it is called: map a spatial context
to an integer categorical over the token alphabet. Contexts follow the
per-stage templates from :mod:`uigc.grid` ("mst" variant) or the upper-left
raster template ("rt" baseline). Prediction picks the longest context whose
table holds at least ``threshold`` observations, backing off by dropping
trailing slots, then per-stage unconditioned counts, then uniform; counts
are add-one smoothed and apportioned to a fixed total of 32768 so the range
coder and the argmax generator consume the identical distribution.

Training walks the coding order of each map ``mask_trials`` times; each pass
draws a mask probability uniformly from [0, 1] and hides group-2/3 cells
with it, so the model sees every masking density between none and total.
Counts accumulate at unmasked positions only (contexts may contain MASK).
"""

from __future__ import annotations

import math

import numpy as np

from . import binio
from .errors import (
    AlphabetMismatch,
    CausalityViolation,
    CorruptModel,
    IdMismatch,
    MaskPresent,
)
from .grid import (
    CONTEXT_TEMPLATES,
    MASK,
    RASTER_TEMPLATE,
    TokenMap,
    coding_order,
    group_of,
    raster_order,
    window_lookup,
)
from .kernels import TOTAL, quantize_distribution

MODEL_MAGIC = b"UIGCPRI1"
_VERSION = 1
_VARIANT_CODES = {"mst": 0, "rt": 1}
_VARIANT_NAMES = {v: k for k, v in _VARIANT_CODES.items()}


class QuantizedCategorical:
    """Integer categorical with frequencies summing to exactly 32768."""

    __slots__ = ("freq", "cum")

    def __init__(self, freq: np.ndarray):
        self.freq = freq
        cum = np.empty(len(freq) + 1, dtype=np.int64)
        cum[0] = 0
        np.cumsum(freq, out=cum[1:])
        self.cum = cum.tolist()

    def argmax(self) -> int:
        """Most probable symbol; ties resolve to the lowest index."""
        return int(np.argmax(self.freq))

    def bits(self, symbol: int) -> float:
        """Ideal code length of ``symbol`` in bits."""
        return 15.0 - math.log2(int(self.freq[symbol]))

    def validate(self) -> None:
        if int(self.freq.sum()) != TOTAL or int(self.freq.min()) < 1:
            raise ValueError("frequencies must be >= 1 and sum to 32768")


class _Entry:
    __slots__ = ("counts", "total")

    def __init__(self, alphabet: int):
        self.counts = np.zeros(alphabet, dtype=np.int64)
        self.total = 0


class ContextModel:
    """Per-stage conditional counts with escape-free backoff."""

    def __init__(
        self,
        variant: str = "mst",
        alphabet: int = 64,
        window: int = 18,
        threshold: int = 8,
        table_cap: int | None = None,
    ):
        if variant not in _VARIANT_CODES:
            raise ValueError(f"unknown variant {variant!r}")
        if not 2 <= alphabet <= 32768:
            raise AlphabetMismatch(f"alphabet size {alphabet} outside [2, 32768]")
        if window < 2 or window % 2:
            raise ValueError("window size must be even and >= 2")
        if threshold < 1:
            raise ValueError("threshold must be >= 1")
        self.variant = variant
        self.alphabet = alphabet
        self.window = window
        self.threshold = threshold
        self.table_cap = table_cap
        self.templates = CONTEXT_TEMPLATES if variant == "mst" else (RASTER_TEMPLATE,)
        self.tables: dict[tuple[int, int], dict] = {
            (s, o): {}
            for s, tpl in enumerate(self.templates)
            for o in range(1, len(tpl) + 1)
        }
        self.order0 = [np.zeros(alphabet, dtype=np.int64) for _ in self.templates]
        self.order0_total = [0] * len(self.templates)
        self._id_cache: int | None = None

    # ------------------------------------------------------------- structure

    @property
    def stages(self) -> int:
        return len(self.templates)

    def stage_of(self, i: int, j: int) -> int:
        return group_of(i, j) if self.variant == "mst" else 0

    def order_entries(self, height: int, width: int):
        if self.variant == "mst":
            return coding_order(height, width, self.window)
        return raster_order(height, width, self.window)

    def _slot_values(self, cells, pos, stage, rect, coded=None):
        i, j = pos
        r0, c0 = rect.row0, rect.col0
        r1, c1 = r0 + rect.height, c0 + rect.width
        alphabet = self.alphabet
        out = []
        for di, dj in self.templates[stage]:
            ii = i + di
            jj = j + dj
            if r0 <= ii < r1 and c0 <= jj < c1:
                if coded is not None and not coded[ii, jj]:
                    raise CausalityViolation(
                        f"context of {pos} references uncoded cell ({ii}, {jj})"
                    )
                v = cells[ii, jj]
                out.append(alphabet if v == MASK else int(v))
            else:
                out.append(alphabet + 1)
        return tuple(out)

    # -------------------------------------------------------------- training

    def _observe(self, cells, pos, stage, rect, token: int) -> None:
        slots = self._slot_values(cells, pos, stage, rect)
        cap = self.table_cap
        for order in range(len(slots), 0, -1):
            table = self.tables[(stage, order)]
            key = slots[:order]
            entry = table.get(key)
            if entry is None:
                if cap is not None and len(table) >= cap:
                    continue
                entry = table[key] = _Entry(self.alphabet)
            entry.counts[token] += 1
            entry.total += 1
        self.order0[stage][token] += 1
        self.order0_total[stage] += 1
        self._id_cache = None

    # ------------------------------------------------------------ prediction

    def predict(self, cells, pos, rect, coded=None) -> QuantizedCategorical:
        """Distribution for ``pos`` given the masked map ``cells``.

        ``cells`` is the raw int32 grid of a token map (MASK = -1); ``rect``
        is the tile containing ``pos``. When ``coded`` (a bool grid) is
        given, referencing an uncoded in-window cell raises
        CausalityViolation.
        """
        stage = self.stage_of(*pos)
        slots = self._slot_values(cells, pos, stage, rect, coded)
        counts = None
        for order in range(len(slots), 0, -1):
            entry = self.tables[(stage, order)].get(slots[:order])
            if entry is not None and entry.total >= self.threshold:
                counts = entry.counts
                break
        if counts is None:
            counts = self.order0[stage]  # all-zero falls through to uniform
        return QuantizedCategorical(quantize_distribution(counts))

    def cross_entropy(self, tokens: TokenMap, keep) -> float:
        """Mean bits per kept token when coding ``tokens`` under mask ``keep``.

        Masked positions are skipped exactly as the coder skips them; their
        cells still appear as MASK inside later contexts.
        """
        if tokens.alphabet != self.alphabet:
            raise AlphabetMismatch("token map alphabet differs from the model")
        if tokens.has_mask():
            raise MaskPresent("cross_entropy needs a fully observed map")
        keep = np.asarray(keep)
        if keep.shape != tokens.cells.shape:
            raise ValueError("mask dimensions do not match the token map")
        zm = tokens.cells.copy()
        zm[keep == 0] = MASK
        lookup = window_lookup(tokens.height, tokens.width, self.window)
        bits = 0.0
        coded = 0
        for (i, j), _stage in self.order_entries(tokens.height, tokens.width):
            if not keep[i, j]:
                continue
            dist = self.predict(zm, (i, j), lookup(i, j))
            bits += dist.bits(int(tokens.cells[i, j]))
            coded += 1
        return bits / coded if coded else 0.0

    # ---------------------------------------------------------- serialization

    @property
    def model_id(self) -> int:
        if self._id_cache is None:
            self._id_cache = binio.fnv1a64(self._body_bytes())
        return self._id_cache

    def _iter_canonical(self):
        for stage in range(self.stages):
            if self.order0_total[stage] > 0:
                yield stage, 0, (), self.order0[stage]
        for (stage, order) in sorted(self.tables):
            table = self.tables[(stage, order)]
            for key in sorted(table):
                yield stage, order, key, table[key].counts

    def _body_bytes(self) -> bytes:
        parts = [
            MODEL_MAGIC,
            binio.pack_u8(_VERSION),
            binio.pack_u8(_VARIANT_CODES[self.variant]),
            binio.pack_u16(self.alphabet),
            binio.pack_u8(self.window),
            binio.pack_u16(self.threshold),
        ]
        entries = list(self._iter_canonical())
        # canonical order: stage, then order, then key bytes
        entries.sort(key=lambda e: (e[0], e[1], e[2]))
        parts.append(binio.pack_u32(len(entries)))
        for stage, order, key, counts in entries:
            body = (
                binio.pack_u8(stage)
                + binio.pack_u8(order)
                + b"".join(binio.pack_u16(v) for v in key)
                + counts.astype(">u8").tobytes()
            )
            parts.append(binio.pack_u32(len(body)))
            parts.append(body)
        return b"".join(parts)

    def to_bytes(self) -> bytes:
        body = self._body_bytes()
        return body + binio.pack_u64(binio.fnv1a64(body))

    @classmethod
    def from_bytes(cls, data: bytes) -> "ContextModel":
        if len(data) < 8:
            raise CorruptModel("model stream shorter than its id")
        r = binio.Reader(data[:-8])
        if r.take(len(MODEL_MAGIC)) != MODEL_MAGIC:
            raise CorruptModel("bad model magic")
        if r.u8() != _VERSION:
            raise CorruptModel("unsupported model version")
        code = r.u8()
        if code not in _VARIANT_NAMES:
            raise CorruptModel(f"unknown variant code {code}")
        alphabet = r.u16()
        window = r.u8()
        threshold = r.u16()
        try:
            model = cls(_VARIANT_NAMES[code], alphabet, window, threshold)
        except (ValueError, AlphabetMismatch) as exc:
            raise CorruptModel(f"bad model parameters: {exc}") from exc
        n_entries = r.u32()
        for _ in range(n_entries):
            length = r.u32()
            raw = binio.Reader(r.take(length))
            stage = raw.u8()
            order = raw.u8()
            if stage >= model.stages or order > len(model.templates[stage]):
                raise CorruptModel("entry stage/order out of range")
            key = tuple(raw.u16() for _ in range(order))
            if any(v > alphabet + 1 for v in key):
                raise CorruptModel("context slot value out of range")
            counts = np.frombuffer(raw.take(alphabet * 8), dtype=">u8").astype(
                np.int64
            )
            if not raw.at_end():
                raise CorruptModel("entry length mismatch")
            if order == 0:
                model.order0[stage] = counts.copy()
                model.order0_total[stage] = int(counts.sum())
            else:
                entry = _Entry(alphabet)
                entry.counts = counts.copy()
                entry.total = int(counts.sum())
                model.tables[(stage, order)][key] = entry
        if not r.at_end():
            raise CorruptModel("trailing bytes in model table section")
        stored = int.from_bytes(data[-8:], "big")
        if binio.fnv1a64(data[:-8]) != stored:
            raise IdMismatch("model id does not match its contents")
        model._id_cache = stored
        return model


def train_prior(
    token_maps,
    variant: str = "mst",
    alphabet: int | None = None,
    window: int = 18,
    mask_trials: int = 4,
    seed: int = 0,
    threshold: int = 8,
    table_cap: int | None = None,
) -> ContextModel:
    """Fit a ContextModel on clean token maps; deterministic given the seed.

    An empty corpus is allowed when ``alphabet`` is given explicitly; the
    resulting model predicts uniform everywhere.
    """
    maps = list(token_maps)
    if alphabet is None:
        if not maps:
            raise ValueError("empty corpus needs an explicit alphabet size")
        alphabet = maps[0].alphabet
    if mask_trials < 1:
        raise ValueError("mask_trials must be >= 1")
    model = ContextModel(variant, alphabet, window, threshold, table_cap)
    rng = np.random.default_rng(seed)
    for tm in maps:
        if tm.alphabet != alphabet:
            raise AlphabetMismatch("training maps disagree on alphabet size")
        h, w = tm.height, tm.width
        cells = tm.cells
        rows = np.arange(h)[:, None]
        cols = np.arange(w)[None, :]
        movable = ((rows + cols) & 1) == 1  # groups 2 and 3
        lookup = window_lookup(h, w, window)
        entries = model.order_entries(h, w)
        for _ in range(mask_trials):
            rho = float(rng.random())
            hidden = movable & (rng.random((h, w)) < rho)
            zm = cells.copy()
            zm[hidden] = MASK
            for (i, j), stage in entries:
                token = cells[i, j]
                if token == MASK or hidden[i, j]:
                    continue
                model._observe(zm, (i, j), stage, lookup(i, j), int(token))
    return model


def save_model(model: ContextModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(model.to_bytes())


def load_model(path) -> ContextModel:
    with open(path, "rb") as fh:
        return ContextModel.from_bytes(fh.read())
