"""Owner-side client library: blocking request/response over one connection."""

from __future__ import annotations

import logging
import socket
from pathlib import Path

from config import INDEX_BITS, SOCKET_TIMEOUT
from ghsed.client_indexer import package_document, serialize_ht, tokenize
from ghsed.errors import (
    AuthorizationError,
    GhsedError,
    ParameterError,
    ProtocolError,
    StoreError,
    TransportError,
)
from ghsed.owner_crypto import decrypt_document, make_trapdoor
from ghsed.protocol import wire
from ghsed.protocol.wire import ErrorCode, Frame, MsgType
from models import DocumentCiphertext, EwMode, OwnerKeyPair, SignedTrapdoor, StorePackage

logger = logging.getLogger(__name__)

_ERRORS = {
    ErrorCode.AUTH: AuthorizationError,
    ErrorCode.PROTO: ProtocolError,
    ErrorCode.STORE: StoreError,
}


def parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not host or not port.isdigit():
        raise ParameterError(f"expected host:port, got {text!r}")
    return host.strip("[]"), int(port)


class _LoggingStream:
    """Write-through wrapper that keeps a copy of every byte sent."""

    def __init__(self, stream, log: list[bytes]):
        self._stream = stream
        self._log = log

    def write(self, data: bytes) -> int:
        self._log.append(bytes(data))
        return self._stream.write(data)

    def flush(self) -> None:
        self._stream.flush()


class GhsedClient:
    """
    One connection to a GHSED server.

    ``wire_log`` (if given) receives a copy of every outgoing frame, which
    lets callers audit exactly what left the owner's machine.
    """

    def __init__(
        self,
        server: str | tuple[str, int],
        timeout: float = SOCKET_TIMEOUT,
        wire_log: list[bytes] | None = None,
    ):
        self.address = parse_address(server) if isinstance(server, str) else server
        try:
            self._sock = socket.create_connection(self.address, timeout=timeout)
        except OSError as e:
            raise TransportError(f"Cannot connect to {self.address[0]}:{self.address[1]}: {e}") from e
        self._rfile = self._sock.makefile("rb")
        wfile = self._sock.makefile("wb")
        self._wfile = _LoggingStream(wfile, wire_log) if wire_log is not None else wfile
        self._raw_wfile = wfile

    def close(self) -> None:
        for f in (self._rfile, self._raw_wfile):
            try:
                f.close()
            except OSError:
                pass
        self._sock.close()

    def __enter__(self) -> GhsedClient:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def request(self, frame: Frame, expect: MsgType) -> Frame:
        try:
            wire.write_frame(self._wfile, frame)
            response = wire.read_frame(self._rfile)
        except OSError as e:
            raise TransportError(f"Connection to server failed: {e}") from e
        if response is None:
            raise TransportError("Server closed the connection")
        if response.msg_type is MsgType.ERROR:
            code, text = wire.parse_error(response.payload)
            raise _ERRORS.get(code, GhsedError)(text)
        if response.msg_type is not expect:
            raise ProtocolError(f"expected {expect.name}, got {response.msg_type.name}")
        return response

    def store_package(self, package: StorePackage) -> int:
        frame = wire.store_request(package.ciphertext.to_bytes(), serialize_ht(package.table))
        return wire.parse_store_response(self.request(frame, MsgType.STORE_RESP).payload)

    def search_trapdoor(self, signed: SignedTrapdoor, ids_only: bool = False) -> list[tuple[int, bytes]]:
        frame = wire.search_request(signed.to_bytes(), ids_only)
        return wire.parse_search_response(self.request(frame, MsgType.SEARCH_RESP).payload)


def normalize_query(word: str) -> str:
    """Apply the indexer's tokenization to a single query word."""
    tokens = tokenize(word)
    if len(tokens) != 1:
        raise ParameterError(f"query must be exactly one keyword, got {len(tokens)} tokens in {word!r}")
    return tokens[0]


def client_store(
    path: str | Path,
    keys: OwnerKeyPair,
    server: str | tuple[str, int] | GhsedClient,
    mode: EwMode = EwMode.PUBLIC,
    index_bits: int = INDEX_BITS,
) -> int:
    package = package_document(Path(path).read_bytes(), keys, mode, index_bits)
    if isinstance(server, GhsedClient):
        return server.store_package(package)
    with GhsedClient(server) as client:
        doc_id = client.store_package(package)
    logger.info("Stored %s as document %d", path, doc_id)
    return doc_id


def client_search(
    word: str,
    keys: OwnerKeyPair,
    server: str | tuple[str, int] | GhsedClient,
    mode: EwMode = EwMode.PUBLIC,
    index_bits: int = INDEX_BITS,
    ids_only: bool = False,
) -> list[tuple[int, bytes | None]]:
    """
    Search by keyword; only the signed trapdoor leaves this machine.

    Returns:
        [(doc_id, plaintext)] with plaintext None when ids_only is set.
        Every returned ciphertext is decrypted and authenticated locally.
    """
    signed = make_trapdoor(normalize_query(word), keys, mode, index_bits)
    if isinstance(server, GhsedClient):
        hits = server.search_trapdoor(signed, ids_only)
    else:
        with GhsedClient(server) as client:
            hits = client.search_trapdoor(signed, ids_only)
    if ids_only:
        return [(doc_id, None) for doc_id, _ in hits]
    return [
        (doc_id, decrypt_document(DocumentCiphertext.from_bytes(blob), keys))
        for doc_id, blob in hits
    ]
