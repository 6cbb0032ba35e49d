"""Length-prefixed binary frames and the message payload codecs.

Frame: 4-byte big-endian length (1 + payload length), 1-byte message type,
payload. Unknown message types are rejected, never skipped.
"""

from __future__ import annotations

import struct
from enum import IntEnum
from typing import BinaryIO

from pydantic import BaseModel

from config import MAX_FRAME_BYTES
from ghsed.errors import ProtocolError

_LENGTH = struct.Struct(">I")


class MsgType(IntEnum):
    STORE_REQ = 1
    STORE_RESP = 2
    SEARCH_REQ = 3
    SEARCH_RESP = 4
    ERROR = 5


class ErrorCode(IntEnum):
    PROTO = 1
    AUTH = 2
    STORE = 3
    INTERNAL = 4


SEARCH_FLAG_IDS_ONLY = 0x01


class Frame(BaseModel):
    msg_type: MsgType
    payload: bytes = b""

    @property
    def length(self) -> int:
        return 1 + len(self.payload)

    def encode(self) -> bytes:
        return _LENGTH.pack(self.length) + bytes([self.msg_type]) + self.payload


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    data = stream.read(n)
    if data is None:
        data = b""
    while len(data) < n:
        chunk = stream.read(n - len(data))
        if not chunk:
            break
        data += chunk
    return data


def read_frame(stream: BinaryIO, max_bytes: int = MAX_FRAME_BYTES) -> Frame | None:
    """Next frame, or None on a clean end of stream between frames."""
    header = _read_exact(stream, _LENGTH.size)
    if not header:
        return None
    if len(header) < _LENGTH.size:
        raise ProtocolError("stream ended inside a frame header")
    (length,) = _LENGTH.unpack(header)
    if length < 1:
        raise ProtocolError("frame length must cover the message type byte")
    if length > max_bytes:
        raise ProtocolError(f"frame of {length} bytes is too large (limit {max_bytes})")
    body = _read_exact(stream, length)
    if len(body) < length:
        raise ProtocolError("stream ended inside a frame body")
    try:
        msg_type = MsgType(body[0])
    except ValueError:
        raise ProtocolError(f"unknown message type {body[0]}") from None
    return Frame(msg_type=msg_type, payload=body[1:])


def write_frame(stream: BinaryIO, frame: Frame) -> None:
    stream.write(frame.encode())
    stream.flush()


# ---------------------------------------------------------------------------
# Payload codecs
# ---------------------------------------------------------------------------

def _split_lengths(payload: bytes, count: int, what: str) -> list[bytes]:
    """Read `count` length-prefixed (u32) blobs that exactly fill the payload."""
    parts, pos = [], 0
    for _ in range(count):
        if pos + 4 > len(payload):
            raise ProtocolError(f"{what}: truncated length field")
        (size,) = _LENGTH.unpack_from(payload, pos)
        pos += 4
        if pos + size > len(payload):
            raise ProtocolError(f"{what}: truncated body")
        parts.append(payload[pos:pos + size])
        pos += size
    if pos != len(payload):
        raise ProtocolError(f"{what}: trailing bytes")
    return parts


def store_request(ciphertext: bytes, ht_bytes: bytes) -> Frame:
    payload = _LENGTH.pack(len(ciphertext)) + ciphertext + _LENGTH.pack(len(ht_bytes)) + ht_bytes
    return Frame(msg_type=MsgType.STORE_REQ, payload=payload)


def parse_store_request(payload: bytes) -> tuple[bytes, bytes]:
    ciphertext, ht_bytes = _split_lengths(payload, 2, "STORE_REQ")
    return ciphertext, ht_bytes


def store_response(doc_id: int) -> Frame:
    return Frame(msg_type=MsgType.STORE_RESP, payload=struct.pack(">Q", doc_id))


def parse_store_response(payload: bytes) -> int:
    if len(payload) != 8:
        raise ProtocolError("STORE_RESP: expected an 8-byte DocId")
    return struct.unpack(">Q", payload)[0]


def search_request(signed_trapdoor: bytes, ids_only: bool = False) -> Frame:
    flags = SEARCH_FLAG_IDS_ONLY if ids_only else 0
    return Frame(msg_type=MsgType.SEARCH_REQ, payload=bytes([flags]) + signed_trapdoor)


def parse_search_request(payload: bytes) -> tuple[bytes, bool]:
    if not payload:
        raise ProtocolError("SEARCH_REQ: empty payload")
    flags = payload[0]
    if flags & ~SEARCH_FLAG_IDS_ONLY:
        raise ProtocolError(f"SEARCH_REQ: unknown flags {flags:#04x}")
    return payload[1:], bool(flags & SEARCH_FLAG_IDS_ONLY)


def search_response(hits: list[tuple[int, bytes]]) -> Frame:
    chunks = [_LENGTH.pack(len(hits))]
    for doc_id, ciphertext in hits:
        chunks.append(struct.pack(">QI", doc_id, len(ciphertext)))
        chunks.append(ciphertext)
    return Frame(msg_type=MsgType.SEARCH_RESP, payload=b"".join(chunks))


def parse_search_response(payload: bytes) -> list[tuple[int, bytes]]:
    if len(payload) < 4:
        raise ProtocolError("SEARCH_RESP: truncated count")
    (count,) = _LENGTH.unpack_from(payload, 0)
    pos, hits = 4, []
    for _ in range(count):
        if pos + 12 > len(payload):
            raise ProtocolError("SEARCH_RESP: truncated hit header")
        doc_id, size = struct.unpack_from(">QI", payload, pos)
        pos += 12
        if pos + size > len(payload):
            raise ProtocolError("SEARCH_RESP: truncated ciphertext")
        hits.append((doc_id, payload[pos:pos + size]))
        pos += size
    if pos != len(payload):
        raise ProtocolError("SEARCH_RESP: trailing bytes")
    return hits


def error_response(code: ErrorCode, text: str) -> Frame:
    return Frame(msg_type=MsgType.ERROR, payload=bytes([code]) + text.encode("utf-8"))


def parse_error(payload: bytes) -> tuple[ErrorCode | int, str]:
    if not payload:
        return ErrorCode.INTERNAL, ""
    try:
        code: ErrorCode | int = ErrorCode(payload[0])
    except ValueError:
        code = payload[0]
    return code, payload[1:].decode("utf-8", errors="replace")
