"""Byte-oriented integer range coder over 15-bit frequency tables.

Encoder state is a 64-bit low accumulator and a 32-bit range; renormalization
emits one byte whenever range drops below 2^24. Carries propagate exactly
through a cached byte plus a pending-0xFF run, so output is append-only.
``finish`` always performs eight byte shifts, which drains every pending byte
(low is zero after at most four shifts); an empty stream is exactly 8 bytes.

The decoder mirrors the encoder: it skips the leading zero byte, primes a
32-bit code word from the next four, and renormalizes in lockstep, so it
never reads past what the encoder wrote for a well-formed stream.
"""

from __future__ import annotations

from bisect import bisect_right

from .errors import PayloadUnderrun
from .kernels import TOTAL

_TOP = 1 << 24
_MASK32 = 0xFFFFFFFF
_SHIFT = 15  # log2(TOTAL)

FLUSH_BYTES = 8


class RangeEncoder:
    """Single-use streaming encoder; call ``finish`` exactly once."""

    __slots__ = ("low", "range", "_cache", "_pending", "_out", "_done")

    def __init__(self):
        self.low = 0
        self.range = _MASK32
        self._cache = 0
        self._pending = 0
        self._out = bytearray()
        self._done = False

    def encode(self, dist, symbol: int) -> None:
        """Narrow the interval to ``dist``'s slice for ``symbol``."""
        if self._done:
            raise RuntimeError("encoder already finished")
        cum = dist.cum
        r = self.range >> _SHIFT
        self.low += cum[symbol] * r
        self.range = (cum[symbol + 1] - cum[symbol]) * r
        while self.range < _TOP:
            self._shift_low()
            self.range = (self.range << 8) & _MASK32

    def _shift_low(self) -> None:
        # low holds at most 33 bits here; bit 32 is the carry
        if self.low < 0xFF000000 or self.low > _MASK32:
            carry = self.low >> 32
            self._out.append((self._cache + carry) & 0xFF)
            if self._pending:
                fill = (0xFF + carry) & 0xFF
                self._out.extend(fill for _ in range(self._pending))
                self._pending = 0
            self._cache = (self.low >> 24) & 0xFF
        else:
            self._pending += 1
        self.low = (self.low << 8) & _MASK32

    def finish(self) -> bytes:
        if self._done:
            raise RuntimeError("encoder already finished")
        self._done = True
        for _ in range(FLUSH_BYTES):
            self._shift_low()
        return bytes(self._out)


class RangeDecoder:
    """Streaming decoder over a payload produced by ``RangeEncoder``."""

    __slots__ = ("code", "range", "_buf", "_pos")

    def __init__(self, payload: bytes):
        if len(payload) < 5:
            raise PayloadUnderrun(f"payload too short: {len(payload)} bytes")
        self._buf = payload
        # payload[0] is the always-zero first settled byte
        self.code = int.from_bytes(payload[1:5], "big")
        self._pos = 5
        self.range = _MASK32

    def _next_byte(self) -> int:
        if self._pos >= len(self._buf):
            raise PayloadUnderrun("token payload exhausted")
        b = self._buf[self._pos]
        self._pos += 1
        return b

    def decode(self, dist) -> int:
        """Return the next symbol under ``dist`` and consume its interval."""
        cum = dist.cum
        r = self.range >> _SHIFT
        value = self.code // r
        if value >= TOTAL:  # only reachable on corrupt input
            value = TOTAL - 1
        symbol = bisect_right(cum, value) - 1
        self.code -= cum[symbol] * r
        self.range = (cum[symbol + 1] - cum[symbol]) * r
        while self.range < _TOP:
            # code < range < 2^24 here for well-formed input; the mask only
            # stops unbounded growth on corrupt streams
            self.code = ((self.code << 8) | self._next_byte()) & _MASK32
            self.range = (self.range << 8) & _MASK32
        return symbol
