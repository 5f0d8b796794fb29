"""Length-prefixed binary framing between the master and its workers.

Header (little-endian, 19 bytes)::

    magic "SCW1" | version u16 | type u8 | round_id u64 | payload length u32

Field elements travel as u64.
"""
from __future__ import annotations

import asyncio
import struct
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from ..errors import ProtocolError

MAGIC = b"SCW1"
VERSION = 1
HEADER = struct.Struct("<4sHBQI")
MAX_PAYLOAD = 1 << 30


class MsgType(IntEnum):
    SETUP = 0
    TASK = 1
    PARTIAL = 2
    CANCEL = 3
    RESULT_ACK = 4
    ERROR = 5


@dataclass(frozen=True)
class WireMessage:
    type: MsgType
    round_id: int = 0
    payload: bytes = b""

    def to_bytes(self) -> bytes:
        return HEADER.pack(MAGIC, VERSION, int(self.type), self.round_id, len(self.payload)) + self.payload


def parse_header(raw: bytes) -> tuple[MsgType, int, int]:
    if len(raw) != HEADER.size:
        raise ProtocolError(f"short header: {len(raw)} of {HEADER.size} bytes")
    magic, version, mtype, round_id, length = HEADER.unpack(raw)
    if magic != MAGIC:
        raise ProtocolError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ProtocolError(f"unsupported protocol version {version}")
    try:
        mtype = MsgType(mtype)
    except ValueError:
        raise ProtocolError(f"unknown message type {mtype}") from None
    if length > MAX_PAYLOAD:
        raise ProtocolError(f"payload of {length} bytes exceeds the {MAX_PAYLOAD}-byte limit")
    return mtype, round_id, length


def from_bytes(raw: bytes) -> WireMessage:
    mtype, round_id, length = parse_header(raw[:HEADER.size])
    payload = raw[HEADER.size:]
    if len(payload) != length:
        raise ProtocolError(f"header announces {length} payload bytes, got {len(payload)}")
    return WireMessage(mtype, round_id, payload)


async def read_message(reader: asyncio.StreamReader) -> WireMessage | None:
    """Next message, or ``None`` on a clean end of stream."""
    try:
        head = await reader.readexactly(HEADER.size)
    except asyncio.IncompleteReadError as exc:
        if not exc.partial:
            return None
        raise ProtocolError("connection closed inside a message header") from None
    mtype, round_id, length = parse_header(head)
    try:
        payload = await reader.readexactly(length)
    except asyncio.IncompleteReadError:
        raise ProtocolError("connection closed inside a message payload") from None
    return WireMessage(mtype, round_id, payload)


# -- payloads -----------------------------------------------------------------

_SETUP = struct.Struct("<BHHHHQIIIQ")
_VEC = struct.Struct("<QI")
_PARTIAL = struct.Struct("<III")
_ERROR = struct.Struct("<H")
_ACK = struct.Struct("<I")


@dataclass(frozen=True)
class ShareInfo:
    """What a worker announces about the share it holds."""
    scheme: int
    n: int
    k: int
    z: int
    worker_index: int
    p: int
    b: int
    subshare_rows: int
    cols: int
    original_m: int


def pack_setup(info: ShareInfo) -> bytes:
    return _SETUP.pack(info.scheme, info.n, info.k, info.z, info.worker_index, info.p,
                       info.b, info.subshare_rows, info.cols, info.original_m)


def unpack_setup(payload: bytes) -> ShareInfo:
    if len(payload) != _SETUP.size:
        raise ProtocolError(f"SETUP payload is {len(payload)} bytes, expected {_SETUP.size}")
    return ShareInfo(*_SETUP.unpack(payload))


def _u64(values) -> bytes:
    return np.array(values, dtype="<u8").tobytes()


def pack_vector(p: int, x) -> bytes:
    x = np.asarray(x).reshape(-1)
    return _VEC.pack(p, x.size) + _u64([int(v) for v in x])


def unpack_vector(payload: bytes) -> tuple[int, list[int]]:
    if len(payload) < _VEC.size:
        raise ProtocolError("TASK payload too short")
    p, count = _VEC.unpack_from(payload)
    body = payload[_VEC.size:]
    if len(body) != 8 * count:
        raise ProtocolError(f"TASK announces {count} elements but carries {len(body)} bytes")
    return p, [int(v) for v in np.frombuffer(body, dtype="<u8")]


def pack_partial(index: int, block) -> bytes:
    arr = np.asarray(block)
    rows, cols = arr.shape
    return _PARTIAL.pack(index, rows, cols) + _u64([int(v) for v in arr.reshape(-1)])


def unpack_partial(payload: bytes) -> tuple[int, np.ndarray]:
    if len(payload) < _PARTIAL.size:
        raise ProtocolError("PARTIAL payload too short")
    index, rows, cols = _PARTIAL.unpack_from(payload)
    body = payload[_PARTIAL.size:]
    if len(body) != 8 * rows * cols:
        raise ProtocolError(f"PARTIAL announces {rows}x{cols} but carries {len(body)} bytes")
    return index, np.frombuffer(body, dtype="<u8").reshape(rows, cols)


def pack_error(code: int, text: str) -> bytes:
    return _ERROR.pack(code) + text.encode("utf-8")


def unpack_error(payload: bytes) -> tuple[int, str]:
    if len(payload) < _ERROR.size:
        raise ProtocolError("ERROR payload too short")
    (code,) = _ERROR.unpack_from(payload)
    return code, payload[_ERROR.size:].decode("utf-8", errors="replace")


def pack_ack(sent: int) -> bytes:
    return _ACK.pack(sent)


def unpack_ack(payload: bytes) -> int:
    if len(payload) != _ACK.size:
        raise ProtocolError("RESULT_ACK payload must be 4 bytes")
    return _ACK.unpack(payload)[0]
