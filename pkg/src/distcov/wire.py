"""Binary wire format for protocol messages.

Frame layout (all integers little-endian):

    magic  4 bytes  b"DCM1"
    kind   u8       1=DataBlock  2=CovBlockMsg  3=Done
    sender u32
    receiver u32
    length u64      payload byte count

DataBlock payload: u32 site, u32 rows, u32 cols, cols x u32 global column
indices, then rows*cols IEEE-754 binary64 values row-major. CovBlockMsg
payload: u32 site_a, u32 site_b, u32 rows, u32 cols, rows + cols u32 global
indices, then the values. Done has an empty payload. Values survive a
round trip bit-for-bit.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .covariance import ColumnBlock, CovBlock
from .errors import LengthMismatch, MalformedFrame, UnknownKind
from .matrix import DenseMatrix

__all__ = [
    "MessageKind",
    "ProtocolMessage",
    "encode_message",
    "decode_message",
    "HEADER",
    "MAGIC",
]

MAGIC = b"DCM1"
HEADER = struct.Struct("<4sBIIQ")  # magic, kind, sender, receiver, payload length
_U32 = struct.Struct("<I")


class MessageKind(IntEnum):
    DATA_BLOCK = 1
    COV_BLOCK = 2
    DONE = 3


@dataclass(frozen=True)
class ProtocolMessage:
    """One frame of the exchange; payload type depends on the kind."""

    kind: MessageKind
    sender: int
    receiver: int
    payload: ColumnBlock | CovBlock | None = None

    def __post_init__(self) -> None:
        want = {
            MessageKind.DATA_BLOCK: ColumnBlock,
            MessageKind.COV_BLOCK: CovBlock,
            MessageKind.DONE: type(None),
        }[self.kind]
        if not isinstance(self.payload, want):
            raise MalformedFrame(
                f"{self.kind.name} payload must be {want.__name__}, "
                f"got {type(self.payload).__name__}"
            )


def _u32s(*values: int) -> bytes:
    return b"".join(_U32.pack(v) for v in values)


def _f64s(values: np.ndarray) -> bytes:
    return np.ascontiguousarray(values, dtype=np.float64).astype("<f8", copy=False).tobytes()


def encode_message(msg: ProtocolMessage) -> bytes:
    """Serialize a message into one self-delimiting frame."""
    if msg.kind is MessageKind.DATA_BLOCK:
        b = msg.payload
        assert isinstance(b, ColumnBlock)
        payload = (
            _u32s(b.site, b.data.rows, b.data.cols)
            + _u32s(*b.global_cols)
            + _f64s(b.data.values)
        )
    elif msg.kind is MessageKind.COV_BLOCK:
        c = msg.payload
        assert isinstance(c, CovBlock)
        payload = (
            _u32s(c.site_a, c.site_b, c.block.rows, c.block.cols)
            + _u32s(*c.rows_global_cols)
            + _u32s(*c.cols_global_cols)
            + _f64s(c.block.values)
        )
    else:
        payload = b""
    header = HEADER.pack(MAGIC, int(msg.kind), msg.sender, msg.receiver, len(payload))
    return header + payload


class _Reader:
    """Sequential cursor over a payload; running past the end is a frame error."""

    __slots__ = ("buf", "pos")

    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def u32(self) -> int:
        if self.pos + 4 > len(self.buf):
            raise MalformedFrame("payload truncated inside a u32 field")
        v = _U32.unpack_from(self.buf, self.pos)[0]
        self.pos += 4
        return v

    def u32_list(self, n: int) -> tuple[int, ...]:
        return tuple(self.u32() for _ in range(n))

    def f64_matrix(self, rows: int, cols: int) -> np.ndarray:
        need = rows * cols * 8
        if self.pos + need > len(self.buf):
            raise MalformedFrame(
                f"payload truncated: {rows}x{cols} values need {need} bytes, "
                f"{len(self.buf) - self.pos} remain"
            )
        flat = np.frombuffer(self.buf, dtype="<f8", count=rows * cols, offset=self.pos)
        self.pos += need
        return np.ascontiguousarray(flat.astype(np.float64).reshape(rows, cols))

    def done(self) -> None:
        if self.pos != len(self.buf):
            raise MalformedFrame(f"{len(self.buf) - self.pos} trailing payload bytes")


def decode_message(frame: bytes) -> ProtocolMessage:
    """Parse one complete frame back into a message.

    Raises:
        MalformedFrame: bad magic, truncated header or payload, trailing bytes.
        UnknownKind: kind byte outside the defined set.
        LengthMismatch: frame size disagrees with the declared payload length.
    """
    if len(frame) < HEADER.size:
        raise MalformedFrame(f"frame of {len(frame)} bytes is shorter than the header")
    magic, kind_byte, sender, receiver, length = HEADER.unpack_from(frame)
    if magic != MAGIC:
        raise MalformedFrame(f"bad magic {magic!r}")
    try:
        kind = MessageKind(kind_byte)
    except ValueError:
        raise UnknownKind(f"unknown message kind {kind_byte:#x}") from None
    if len(frame) != HEADER.size + length:
        raise LengthMismatch(
            f"header declares {length} payload bytes, frame carries "
            f"{len(frame) - HEADER.size}"
        )
    r = _Reader(frame[HEADER.size :])

    if kind is MessageKind.DONE:
        r.done()
        return ProtocolMessage(kind=kind, sender=sender, receiver=receiver)

    if kind is MessageKind.DATA_BLOCK:
        site = r.u32()
        rows, cols = r.u32(), r.u32()
        global_cols = r.u32_list(cols)
        values = r.f64_matrix(rows, cols)
        r.done()
        # Full constructor, not the fast path: wire bytes are unvalidated.
        block = ColumnBlock(
            site=site, data=DenseMatrix(values), global_cols=global_cols
        )
        return ProtocolMessage(kind=kind, sender=sender, receiver=receiver, payload=block)

    site_a, site_b = r.u32(), r.u32()
    rows, cols = r.u32(), r.u32()
    rows_cols = r.u32_list(rows)
    cols_cols = r.u32_list(cols)
    values = r.f64_matrix(rows, cols)
    r.done()
    cov = CovBlock(
        site_a=site_a,
        site_b=site_b,
        block=DenseMatrix(values),
        rows_global_cols=rows_cols,
        cols_global_cols=cols_cols,
    )
    return ProtocolMessage(kind=kind, sender=sender, receiver=receiver, payload=cov)
