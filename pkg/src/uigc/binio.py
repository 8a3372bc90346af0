"""Big-endian byte packing helpers and the FNV-1a content hash.

All on-disk integers in this project are unsigned big-endian; every file
format ends with a 64-bit FNV-1a digest of the bytes that precede it.
"""

from __future__ import annotations

import struct

from .errors import CorruptModel

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x00000100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _U64
    return h


def pack_u8(v: int) -> bytes:
    return struct.pack(">B", v)


def pack_u16(v: int) -> bytes:
    return struct.pack(">H", v)


def pack_u32(v: int) -> bytes:
    return struct.pack(">I", v)


def pack_u64(v: int) -> bytes:
    return struct.pack(">Q", v)


class Reader:
    """Cursor over a byte string; raises ``CorruptModel`` on underrun."""

    def __init__(self, data: bytes, error=CorruptModel):
        self.data = data
        self.pos = 0
        self._error = error

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise self._error(f"truncated stream: wanted {n} bytes at offset {self.pos}")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def at_end(self) -> bool:
        return self.pos == len(self.data)
