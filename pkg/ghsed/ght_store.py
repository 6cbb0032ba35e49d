"""Server side: the Global Heuristic Table, the document registry and persistence.

The GHT maps an IndexKey to a chain of entries; each entry holds (KI, Ver-Key)
and a bitmap of the documents containing that keyword. The server only ever
sees IndexKeys, KI values, digit sums and ciphertexts.
"""

from __future__ import annotations

import hashlib
import logging
import os
import struct
import threading
from collections.abc import Iterable, Iterator
from contextlib import contextmanager
from pathlib import Path

from config import EW_MODE, INDEX_BITS, MAX_KEYWORD_LENGTH, SNAPSHOT_NAME
from ghsed.client_indexer import parse_ht, serialize_ht
from ghsed.errors import (
    ContractError,
    FormatError,
    IntegrityError,
    ProtocolError,
    StoreError,
)
from ghsed.keyword_core import (
    digest_algorithm_id,
    digit_sum,
    index_bits_of,
    ki_upper_bound,
    make_ver_key,
)
from models import (
    DocLocator,
    DocRegistry,
    DocumentCiphertext,
    EwMode,
    GhtStats,
    HeuristicTable,
    HtRecord,
    Trapdoor,
    VerKey,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Chain entries
# ---------------------------------------------------------------------------

class DocBitmap:
    """Growable bit set over DocIds; bit d set means document d contains the keyword."""

    __slots__ = ("bits",)

    def __init__(self, bits: int = 0):
        self.bits = bits

    def add(self, doc_id: int) -> None:
        self.bits |= 1 << doc_id

    def discard(self, doc_id: int) -> None:
        self.bits &= ~(1 << doc_id)

    def __contains__(self, doc_id: int) -> bool:
        return (self.bits >> doc_id) & 1 == 1

    def __len__(self) -> int:
        return self.bits.bit_count()

    def doc_ids(self) -> list[int]:
        ids = []
        bits = self.bits
        while bits:
            low = bits & -bits
            ids.append(low.bit_length() - 1)
            bits ^= low
        return ids

    @classmethod
    def from_doc_ids(cls, doc_ids: Iterable[int]) -> DocBitmap:
        bitmap = cls()
        for d in doc_ids:
            bitmap.add(d)
        return bitmap


class GhtEntry:
    __slots__ = ("ki", "ver_key", "postings")

    def __init__(self, ki: int, ver_key: VerKey, postings: DocBitmap | None = None):
        self.ki = ki
        self.ver_key = ver_key
        self.postings = postings if postings is not None else DocBitmap()

    def __repr__(self) -> str:
        return f"GhtEntry(ki={self.ki}, ver_key={self.ver_key}, docs={self.postings.doc_ids()})"


class ReadWriteLock:
    """Many concurrent readers or one writer."""

    def __init__(self):
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False

    @contextmanager
    def read(self) -> Iterator[None]:
        with self._cond:
            while self._writer:
                self._cond.wait()
            self._readers += 1
        try:
            yield
        finally:
            with self._cond:
                self._readers -= 1
                if self._readers == 0:
                    self._cond.notify_all()

    @contextmanager
    def write(self) -> Iterator[None]:
        with self._cond:
            while self._writer or self._readers:
                self._cond.wait()
            self._writer = True
        try:
            yield
        finally:
            with self._cond:
                self._writer = False
                self._cond.notify_all()


# ---------------------------------------------------------------------------
# Global Heuristic Table
# ---------------------------------------------------------------------------

class GlobalHeuristicTable:
    """IndexKey -> chain of GhtEntry, append-at-tail, first match wins.

    Not synchronized; GhtStore owns the locking.
    """

    def __init__(self, index_bits: int = INDEX_BITS):
        self.index_bits = index_bits
        self.digest_algorithm_id = digest_algorithm_id(index_bits)
        self._buckets: dict[int, list[GhtEntry]] = {}
        self._entries = 0
        self._max_chain = 0
        self._counters = GhtStats()
        self._counter_lock = threading.Lock()

    def __len__(self) -> int:
        return self._entries

    def chain(self, index: int) -> list[GhtEntry]:
        return self._buckets.get(index, [])

    def buckets(self) -> Iterator[tuple[int, list[GhtEntry]]]:
        return iter(self._buckets.items())

    def stats(self) -> GhtStats:
        with self._counter_lock:
            stats = self._counters.model_copy()
        stats.bucket_count = len(self._buckets)
        stats.record_count = self._entries
        stats.max_chain = self._max_chain
        stats.mean_chain = self._entries / len(self._buckets) if self._buckets else 0.0
        return stats

    def reset_counters(self) -> None:
        with self._counter_lock:
            self._counters = GhtStats()

    def embed(self, records: Iterable[HtRecord], doc_id: int) -> list[tuple]:
        """Add one document's records; returns an undo log for rollback()."""
        undo: list[tuple] = []
        bucket_probes = chain_probes = 0
        for r in records:
            bucket_probes += 1
            chain = self._buckets.get(r.index)
            if chain is None:
                entry = GhtEntry(r.ki, r.ver_key)
                self._buckets[r.index] = [entry]
                self._entries += 1
                self._max_chain = max(self._max_chain, 1)
                undo.append(("bucket", r.index))
            else:
                for entry in chain:
                    chain_probes += 1
                    if entry.ki == r.ki and entry.ver_key == r.ver_key:
                        break
                else:
                    entry = GhtEntry(r.ki, r.ver_key)
                    chain.append(entry)
                    self._entries += 1
                    self._max_chain = max(self._max_chain, len(chain))
                    undo.append(("chain", r.index))
            if doc_id not in entry.postings:
                entry.postings.add(doc_id)
                undo.append(("bit", entry, doc_id))
        with self._counter_lock:
            c = self._counters
            c.embed_ops += 1
            c.embed_bucket_probes += bucket_probes
            c.embed_chain_probes += chain_probes
        return undo

    def rollback(self, undo: list[tuple]) -> None:
        for action in reversed(undo):
            if action[0] == "bit":
                action[1].postings.discard(action[2])
            elif action[0] == "chain":
                self._buckets[action[1]].pop()
                self._entries -= 1
            else:
                del self._buckets[action[1]]
                self._entries -= 1
        self._max_chain = max((len(c) for c in self._buckets.values()), default=0)

    def search(self, td: Trapdoor) -> set[int]:
        """Walk the single chain at td.t_index; never reads any other bucket."""
        chain_probes = bitmaps = 0
        result: set[int] = set()
        chain = self._buckets.get(td.t_index)
        if chain is not None:
            wanted = make_ver_key(td.t_ki, digit_sum(td.t_ew))
            for entry in chain:
                chain_probes += 1
                if entry.ki == td.t_ki and entry.ver_key == wanted:
                    bitmaps = 1
                    result = set(entry.postings.doc_ids())
                    break
        with self._counter_lock:
            c = self._counters
            c.search_ops += 1
            c.search_bucket_probes += 1
            c.search_chain_probes += chain_probes
            c.search_bitmap_reads += bitmaps
            c.last_search_buckets = 1
            c.last_search_chain_probes = chain_probes
            c.last_search_bitmaps = bitmaps
        return result

    def count_baseline(self, table_probes: int, chain_probes: int) -> None:
        with self._counter_lock:
            c = self._counters
            c.baseline_ops += 1
            c.baseline_table_probes += table_probes
            c.baseline_chain_probes += chain_probes


# ---------------------------------------------------------------------------
# Snapshot codec
# ---------------------------------------------------------------------------

SNAPSHOT_MAGIC = b"GHSEDGHT"
SNAPSHOT_VERSION = 1
_CHECKSUM_SIZE = hashlib.sha256().digest_size


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str) -> tuple:
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise IntegrityError("snapshot: structure overruns the file")
        values = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return values

    def take_str(self) -> str:
        (size,) = self.take(">B")
        raw = self.data[self.pos:self.pos + size]
        if len(raw) != size:
            raise IntegrityError("snapshot: truncated string")
        self.pos += size
        return raw.decode("ascii")


def _encode_snapshot(ght: GlobalHeuristicTable, registry: DocRegistry, mode: EwMode) -> bytes:
    algorithm = ght.digest_algorithm_id.encode("ascii")
    mode_bytes = mode.value.encode("ascii")
    chunks = [
        SNAPSHOT_MAGIC,
        struct.pack(">H", SNAPSHOT_VERSION),
        struct.pack(">B", len(algorithm)), algorithm,
        struct.pack(">B", len(mode_bytes)), mode_bytes,
        struct.pack(">Q", registry.next_id),
        struct.pack(">I", len(registry.entries)),
    ]
    for doc_id in sorted(registry.entries):
        chunks.append(struct.pack(">QQ", doc_id, registry.entries[doc_id].byte_size))
    chunks.append(struct.pack(">I", len(ght._buckets)))
    for index in sorted(ght._buckets):
        chain = ght._buckets[index]
        chunks.append(struct.pack(">QI", index, len(chain)))
        for entry in chain:
            doc_ids = entry.postings.doc_ids()
            deltas = [b - a for a, b in zip([0] + doc_ids, doc_ids)]
            chunks.append(struct.pack(">III", entry.ki, entry.ver_key.digit_sum, len(deltas)))
            chunks.append(struct.pack(f">{len(deltas)}I", *deltas))
    body = b"".join(chunks)
    return body + hashlib.sha256(body).digest()


def _decode_snapshot(data: bytes) -> tuple[GlobalHeuristicTable, DocRegistry, EwMode, dict[int, int]]:
    if len(data) < len(SNAPSHOT_MAGIC) + _CHECKSUM_SIZE or not data.startswith(SNAPSHOT_MAGIC):
        raise IntegrityError("snapshot: bad magic or too short")
    body, checksum = data[:-_CHECKSUM_SIZE], data[-_CHECKSUM_SIZE:]
    if hashlib.sha256(body).digest() != checksum:
        raise IntegrityError("snapshot: checksum mismatch")

    reader = _Reader(body)
    reader.pos = len(SNAPSHOT_MAGIC)
    try:
        (version,) = reader.take(">H")
        if version != SNAPSHOT_VERSION:
            raise IntegrityError(f"snapshot: unsupported version {version}")
        ght = GlobalHeuristicTable(index_bits_of(reader.take_str()))
        mode = EwMode(reader.take_str())
    except (UnicodeDecodeError, ValueError) as e:
        raise IntegrityError(f"snapshot: bad header ({e})") from e

    (next_id,) = reader.take(">Q")
    (doc_count,) = reader.take(">I")
    sizes = {}
    for _ in range(doc_count):
        doc_id, byte_size = reader.take(">QQ")
        sizes[doc_id] = byte_size
    registry = DocRegistry(next_id=next_id)

    (bucket_count,) = reader.take(">I")
    for _ in range(bucket_count):
        index, chain_len = reader.take(">QI")
        chain = []
        for _ in range(chain_len):
            ki_value, s, count = reader.take(">III")
            doc_id = 0
            postings = DocBitmap()
            for delta in reader.take(f">{count}I"):
                doc_id += delta
                if doc_id not in sizes:
                    raise IntegrityError(f"snapshot: posting refers to unknown DocId {doc_id}")
                postings.add(doc_id)
            chain.append(GhtEntry(ki_value, make_ver_key(ki_value, s), postings))
        ght._buckets[index] = chain
        ght._entries += chain_len
        ght._max_chain = max(ght._max_chain, chain_len)
    if reader.pos != len(body):
        raise IntegrityError("snapshot: trailing bytes before checksum")
    if any(d >= next_id for d in sizes):
        raise IntegrityError("snapshot: DocId beyond next_id")
    return ght, registry, mode, sizes


# ---------------------------------------------------------------------------
# Store facade
# ---------------------------------------------------------------------------

class GhtStore:
    """GHT + registry + per-document persistence under a reader-writer lock.

    With ``data_dir=None`` everything stays in memory (benchmarks, tests).
    """

    def __init__(
        self,
        data_dir: str | Path | None = None,
        index_bits: int = INDEX_BITS,
        mode: EwMode | str = EW_MODE,
    ):
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self.mode = EwMode(mode)
        self.ght = GlobalHeuristicTable(index_bits)
        self.registry = DocRegistry()
        self._lock = ReadWriteLock()
        self._doc_indexes: dict[int, dict[int, list[HtRecord]]] = {}
        # baseline scans fill the cache while holding only the read lock
        self._doc_index_lock = threading.Lock()
        self._blobs: dict[int, bytes] = {}
        if self.data_dir is not None:
            (self.data_dir / "docs").mkdir(parents=True, exist_ok=True)

    @classmethod
    def open(
        cls,
        data_dir: str | Path,
        index_bits: int = INDEX_BITS,
        mode: EwMode | str = EW_MODE,
    ) -> GhtStore:
        """Restore the snapshot if present, then re-embed documents stored after it."""
        store = cls(data_dir, index_bits, mode)
        snapshot_path = store.snapshot_path
        if snapshot_path.exists():
            store.restore(snapshot_path)
        store._replay_unsnapshotted()
        return store

    @property
    def snapshot_path(self) -> Path:
        if self.data_dir is None:
            raise ContractError("in-memory store has no snapshot path")
        return self.data_dir / SNAPSHOT_NAME

    def stats(self) -> GhtStats:
        with self._lock.read():
            return self.ght.stats()

    def __len__(self) -> int:
        return len(self.registry.entries)

    # -- storing -------------------------------------------------------------

    def _doc_paths(self, doc_id: int) -> tuple[Path, Path]:
        base = self.data_dir / "docs" / f"{doc_id:010d}"
        return base.with_suffix(".doc"), base.with_suffix(".ht")

    def _persist(self, doc_id: int, ciphertext: bytes, ht_bytes: bytes) -> DocLocator:
        if self.data_dir is None:
            self._blobs[doc_id] = ciphertext
            return DocLocator(ciphertext_path="", ht_path="", byte_size=len(ciphertext))
        doc_path, ht_path = self._doc_paths(doc_id)
        written = []
        try:
            for path, payload in ((doc_path, ciphertext), (ht_path, ht_bytes)):
                tmp = path.with_suffix(path.suffix + ".tmp")
                tmp.write_bytes(payload)
                os.replace(tmp, path)
                written.append(path)
        except OSError as e:
            for path in written:
                path.unlink(missing_ok=True)
            raise StoreError(f"Failed to persist document {doc_id}: {e}") from e
        return DocLocator(
            ciphertext_path=str(doc_path.relative_to(self.data_dir)),
            ht_path=str(ht_path.relative_to(self.data_dir)),
            byte_size=len(ciphertext),
        )

    def _check_table(self, t: HeuristicTable) -> None:
        if t.digest_algorithm_id != self.ght.digest_algorithm_id:
            raise ProtocolError(
                f"heuristic table uses {t.digest_algorithm_id}, "
                f"server index uses {self.ght.digest_algorithm_id}"
            )
        if t.mode != self.mode:
            raise ProtocolError(f"heuristic table mode {t.mode.value}, server mode {self.mode.value}")
        ki_limit = ki_upper_bound(MAX_KEYWORD_LENGTH)
        for r in t.records:
            if r.ki > ki_limit or r.ver_key.digit_sum >= 1 << 32:
                raise ProtocolError(f"heuristic table record {r.index:016x} out of range")

    def store_document(self, c: DocumentCiphertext | bytes, t: HeuristicTable) -> int:
        """Assign a DocId, persist ciphertext and HT, embed. All or nothing."""
        self._check_table(t)
        ciphertext = c if isinstance(c, bytes) else c.to_bytes()
        ht_bytes = serialize_ht(t)
        with self._lock.write():
            doc_id = self.registry.next_id
            locator = self._persist(doc_id, ciphertext, ht_bytes)
            self.registry.entries[doc_id] = locator
            self.registry.next_id = doc_id + 1
            try:
                self._embed_locked(t, doc_id)
            except Exception as e:
                del self.registry.entries[doc_id]
                self.registry.next_id = doc_id
                self._blobs.pop(doc_id, None)
                if self.data_dir is not None:
                    for path in self._doc_paths(doc_id):
                        path.unlink(missing_ok=True)
                raise StoreError(f"Embedding document {doc_id} failed: {e}") from e
        logger.info("Stored document %d (%d records, %d bytes)", doc_id, len(t.records), len(ciphertext))
        return doc_id

    def _embed_locked(self, t: HeuristicTable, doc_id: int) -> list[tuple]:
        if doc_id not in self.registry:
            raise ContractError(f"DocId {doc_id} is not registered")
        undo = self.ght.embed(t.records, doc_id)
        try:
            self._doc_indexes[doc_id] = _index_records(t.records)
        except Exception:
            self.ght.rollback(undo)
            raise
        return undo

    def embed_ht(self, t: HeuristicTable, doc_id: int) -> None:
        self._check_table(t)
        with self._lock.write():
            self._embed_locked(t, doc_id)

    # -- searching -----------------------------------------------------------

    def search(self, td: Trapdoor) -> set[int]:
        with self._lock.read():
            return self.ght.search(td)

    def baseline_scan(self, td: Trapdoor) -> set[int]:
        """Per-document scan: probe every stored HT independently."""
        wanted = make_ver_key(td.t_ki, digit_sum(td.t_ew))
        result = set()
        table_probes = chain_probes = 0
        with self._lock.read():
            for doc_id in self.registry.entries:
                table_probes += 1
                for r in self._doc_index(doc_id).get(td.t_index, ()):
                    chain_probes += 1
                    if r.ki == td.t_ki and r.ver_key == wanted:
                        result.add(doc_id)
                        break
            self.ght.count_baseline(table_probes, chain_probes)
        return result

    def _doc_index(self, doc_id: int) -> dict[int, list[HtRecord]]:
        with self._doc_index_lock:
            index = self._doc_indexes.get(doc_id)
            if index is None:
                index = _index_records(self.load_ht(doc_id).records)
                self._doc_indexes[doc_id] = index
            return index

    def fetch_ciphertext(self, doc_id: int) -> bytes:
        if doc_id not in self.registry:
            raise ContractError(f"DocId {doc_id} is not registered")
        if self.data_dir is None:
            if doc_id not in self._blobs:
                raise StoreError(f"ciphertext of document {doc_id} is not held in memory")
            return self._blobs[doc_id]
        try:
            return self._doc_paths(doc_id)[0].read_bytes()
        except OSError as e:
            raise StoreError(f"Failed to read document {doc_id}: {e}") from e

    def load_ht(self, doc_id: int) -> HeuristicTable:
        if self.data_dir is None:
            raise StoreError(f"heuristic table of document {doc_id} is not held in memory")
        try:
            return parse_ht(self._doc_paths(doc_id)[1].read_bytes())
        except OSError as e:
            raise StoreError(f"Failed to read heuristic table {doc_id}: {e}") from e

    # -- persistence ---------------------------------------------------------

    def snapshot(self, path: str | Path | None = None) -> str:
        path = Path(path) if path is not None else self.snapshot_path
        with self._lock.read():
            data = _encode_snapshot(self.ght, self.registry, self.mode)
        tmp = path.with_suffix(path.suffix + ".tmp")
        try:
            tmp.write_bytes(data)
            os.replace(tmp, path)
        except OSError as e:
            raise StoreError(f"Failed to write snapshot {path}: {e}") from e
        logger.info("Snapshot written to %s (%d bytes, %d documents)", path, len(data), len(self))
        return str(path)

    def restore(self, path: str | Path) -> None:
        try:
            data = Path(path).read_bytes()
        except OSError as e:
            raise StoreError(f"Failed to read snapshot {path}: {e}") from e
        ght, registry, mode, sizes = _decode_snapshot(data)
        if ght.digest_algorithm_id != self.ght.digest_algorithm_id or mode != self.mode:
            raise IntegrityError(
                f"snapshot {path} was written for {ght.digest_algorithm_id}/{mode.value}, "
                f"store is configured for {self.ght.digest_algorithm_id}/{self.mode.value}"
            )
        for doc_id, byte_size in sorted(sizes.items()):
            if self.data_dir is not None:
                doc_path, ht_path = self._doc_paths(doc_id)
                registry.entries[doc_id] = DocLocator(
                    ciphertext_path=str(doc_path.relative_to(self.data_dir)),
                    ht_path=str(ht_path.relative_to(self.data_dir)),
                    byte_size=byte_size,
                )
            else:
                registry.entries[doc_id] = DocLocator(ciphertext_path="", ht_path="", byte_size=byte_size)
        with self._lock.write():
            self.ght, self.registry = ght, registry
            self._doc_indexes = {}
            if self.data_dir is None:
                self._doc_indexes = _indexes_from_ght(ght, registry)
        logger.info("Restored %d documents from %s", len(registry.entries), path)

    def _replay_unsnapshotted(self) -> None:
        pending = []
        for ht_path in sorted((self.data_dir / "docs").glob("*.ht")):
            if not ht_path.stem.isdigit():
                continue
            doc_id = int(ht_path.stem)
            if doc_id >= self.registry.next_id:
                pending.append(doc_id)
        for doc_id in pending:
            doc_path, _ = self._doc_paths(doc_id)
            try:
                table = self.load_ht(doc_id)
                self._check_table(table)
            except (FormatError, ProtocolError) as e:
                raise IntegrityError(f"stored heuristic table {doc_id} unusable: {e}") from e
            with self._lock.write():
                self.registry.entries[doc_id] = DocLocator(
                    ciphertext_path=str(doc_path.relative_to(self.data_dir)),
                    ht_path=str(self._doc_paths(doc_id)[1].relative_to(self.data_dir)),
                    byte_size=doc_path.stat().st_size if doc_path.exists() else 0,
                )
                self.registry.next_id = doc_id + 1
                self._embed_locked(table, doc_id)
        if pending:
            logger.info("Re-embedded %d documents stored after the last snapshot", len(pending))


def _index_records(records: Iterable[HtRecord]) -> dict[int, list[HtRecord]]:
    index: dict[int, list[HtRecord]] = {}
    for r in records:
        index.setdefault(r.index, []).append(r)
    return index


def _indexes_from_ght(ght: GlobalHeuristicTable, registry: DocRegistry) -> dict[int, dict[int, list[HtRecord]]]:
    """Rebuild per-document tables from the postings (in-memory restores)."""
    indexes: dict[int, dict[int, list[HtRecord]]] = {d: {} for d in registry.entries}
    for index, chain in ght.buckets():
        for entry in chain:
            record = HtRecord(index=index, ki=entry.ki, ver_key=entry.ver_key)
            for doc_id in entry.postings.doc_ids():
                indexes[doc_id].setdefault(index, []).append(record)
    return indexes
