"""The long-running server: frame dispatch over a threaded TCP listener."""

from __future__ import annotations

import logging
import signal
import socketserver
import threading
from pathlib import Path

from config import INDEX_BITS, MAX_FRAME_BYTES, SOCKET_TIMEOUT
from ghsed.client_indexer import parse_ht
from ghsed.errors import (
    AuthorizationError,
    FormatError,
    GhsedError,
    ProtocolError,
    StoreError,
)
from ghsed.ght_store import GhtStore
from ghsed.owner_crypto import load_public_key, save_public_key, verify_trapdoor
from ghsed.protocol import wire
from ghsed.protocol.wire import ErrorCode, Frame, MsgType
from models import DocumentCiphertext, EwMode, OwnerPublicKey, SignedTrapdoor

logger = logging.getLogger(__name__)

OWNER_KEY_FILE = "owner_public.pem"


class GhsedService:
    """Maps one request frame to exactly one response frame.

    Search requests are signature-checked before the GHT is touched; the
    service has no entry point that accepts a plaintext keyword.
    """

    def __init__(self, store: GhtStore, owner_pub: OwnerPublicKey):
        self.store = store
        self.owner_pub = owner_pub.public()

    def handle(self, frame: Frame) -> Frame:
        try:
            if frame.msg_type is MsgType.STORE_REQ:
                return self._store(frame.payload)
            if frame.msg_type is MsgType.SEARCH_REQ:
                return self._search(frame.payload)
            raise ProtocolError(f"{frame.msg_type.name} is not a request")
        except (ProtocolError, FormatError) as e:
            logger.warning("Rejected request: PROTO (%s)", e)
            return wire.error_response(ErrorCode.PROTO, str(e))
        except AuthorizationError as e:
            logger.warning("Rejected search: AUTH (%s)", e)
            return wire.error_response(ErrorCode.AUTH, str(e))
        except StoreError as e:
            logger.error("Store failure: %s", e)
            return wire.error_response(ErrorCode.STORE, str(e))
        except GhsedError as e:
            logger.error("Request failed: %s", e)
            return wire.error_response(ErrorCode.INTERNAL, str(e))

    def _store(self, payload: bytes) -> Frame:
        ciphertext_bytes, ht_bytes = wire.parse_store_request(payload)
        DocumentCiphertext.from_bytes(ciphertext_bytes)
        table = parse_ht(ht_bytes)
        doc_id = self.store.store_document(ciphertext_bytes, table)
        return wire.store_response(doc_id)

    def _search(self, payload: bytes) -> Frame:
        trapdoor_bytes, ids_only = wire.parse_search_request(payload)
        signed = SignedTrapdoor.from_bytes(trapdoor_bytes)
        trapdoor = verify_trapdoor(signed, self.owner_pub)
        doc_ids = sorted(self.store.search(trapdoor))
        if ids_only:
            hits = [(d, b"") for d in doc_ids]
        else:
            hits = [(d, self.store.fetch_ciphertext(d)) for d in doc_ids]
        logger.info("Search answered with %d documents", len(hits))
        return wire.search_response(hits)


class _RequestHandler(socketserver.StreamRequestHandler):
    timeout = SOCKET_TIMEOUT

    def handle(self) -> None:
        service: GhsedService = self.server.service
        peer = "%s:%s" % self.client_address[:2]
        logger.info("Connection from %s", peer)
        try:
            while True:
                try:
                    frame = wire.read_frame(self.rfile, self.server.max_frame_bytes)
                except ProtocolError as e:
                    logger.warning("Malformed frame from %s: %s", peer, e)
                    wire.write_frame(self.wfile, wire.error_response(ErrorCode.PROTO, str(e)))
                    break
                if frame is None:
                    break
                response = service.handle(frame)
                wire.write_frame(self.wfile, response)
                if response.msg_type is MsgType.ERROR and response.payload[:1] == bytes([ErrorCode.PROTO]):
                    break
        except OSError as e:
            logger.info("Connection %s dropped: %s", peer, e)
        finally:
            logger.info("Connection from %s closed", peer)


class GhsedServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, address: tuple[str, int], service: GhsedService, max_frame_bytes: int = MAX_FRAME_BYTES):
        self.service = service
        self.max_frame_bytes = max_frame_bytes
        super().__init__(address, _RequestHandler)

    @property
    def address(self) -> tuple[str, int]:
        return self.server_address[:2]

    def start_background(self) -> threading.Thread:
        thread = threading.Thread(target=self.serve_forever, name="ghsed-server", daemon=True)
        thread.start()
        return thread


def resolve_owner_key(data_dir: str | Path, owner_key: str | Path | None) -> OwnerPublicKey:
    """Load the owner public key; a copy is kept in the data directory."""
    stored = Path(data_dir) / OWNER_KEY_FILE
    if owner_key:
        pub = load_public_key(owner_key)
        if stored.exists() and load_public_key(stored).key_id != pub.key_id:
            raise StoreError(f"{data_dir} already belongs to a different owner key")
        save_public_key(pub, data_dir, OWNER_KEY_FILE)
        return pub
    if stored.exists():
        return load_public_key(stored)
    raise StoreError("No owner public key: pass --owner-key or set GHSED_OWNER_KEY_DIR")


def serve(
    data_dir: str | Path,
    listen: tuple[str, int],
    owner_key: str | Path | None = None,
    index_bits: int = INDEX_BITS,
    mode: EwMode | str = EwMode.PUBLIC,
) -> None:
    """Restore state, answer requests until interrupted, snapshot on the way out."""
    Path(data_dir).mkdir(parents=True, exist_ok=True)
    owner_pub = resolve_owner_key(data_dir, owner_key)
    store = GhtStore.open(data_dir, index_bits=index_bits, mode=mode)
    server = GhsedServer(listen, GhsedService(store, owner_pub))

    def _terminate(signum, _frame):
        logger.info("Received signal %d, shutting down", signum)
        threading.Thread(target=server.shutdown, daemon=True).start()

    signal.signal(signal.SIGTERM, _terminate)
    logger.info(
        "Serving %d documents on %s:%d (owner key %s)",
        len(store), *server.address, owner_pub.key_id,
    )
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        logger.info("Interrupted, shutting down")
    finally:
        server.server_close()
        store.snapshot()
