"""Document generator side: tokenize, build the heuristic table, serialize it."""

from __future__ import annotations

import logging
import re

from pydantic import ValidationError

from config import INDEX_BITS, MAX_KEYWORD_LENGTH
from ghsed.errors import FormatError
from ghsed.keyword_core import (
    Keyword,
    digest_algorithm_id,
    digit_sum,
    index_bits_of,
    index_of,
    ki,
    make_ver_key,
)
from ghsed.owner_crypto import encrypt_document, encrypt_keyword
from models import (
    EwMode,
    HeuristicTable,
    HtRecord,
    OwnerKeyPair,
    OwnerPublicKey,
    StorePackage,
    VerKey,
)
from models.heuristic import is_minimal_decimal

logger = logging.getLogger(__name__)

HT_MAGIC = "GHSED-HT"
HT_VERSION = "v1"

# ASCII only: without re.ASCII, IGNORECASE lets the Kelvin sign match [a-z].
_TOKEN_RE = re.compile(r"[a-z0-9]+", re.ASCII | re.IGNORECASE)


def tokenize(text: str) -> list[Keyword]:
    """Lowercase alphanumeric runs, truncated to 64 characters, order and repeats kept."""
    return [Keyword(m.group(0).lower()[:MAX_KEYWORD_LENGTH]) for m in _TOKEN_RE.finditer(text)]


def make_record(
    w: str,
    k: OwnerPublicKey,
    mode: EwMode = EwMode.PUBLIC,
    index_bits: int = INDEX_BITS,
) -> HtRecord:
    ki_value = ki(w)
    return HtRecord(
        index=index_of(w, index_bits),
        ki=ki_value,
        ver_key=make_ver_key(ki_value, digit_sum(encrypt_keyword(w, k, mode))),
    )


def build_heuristic_table(
    plaintext: str,
    k: OwnerPublicKey,
    mode: EwMode = EwMode.PUBLIC,
    index_bits: int = INDEX_BITS,
) -> HeuristicTable:
    distinct = dict.fromkeys(tokenize(plaintext))
    records = [make_record(w, k, mode, index_bits) for w in distinct]
    records.sort(key=HtRecord.sort_key)
    return HeuristicTable(
        records=records,
        digest_algorithm_id=digest_algorithm_id(index_bits),
        mode=EwMode(mode),
    )


def package_document(
    data: bytes,
    k: OwnerPublicKey,
    mode: EwMode = EwMode.PUBLIC,
    index_bits: int = INDEX_BITS,
) -> StorePackage:
    """Encrypt a file and index its UTF-8 text (undecodable bytes ignored)."""
    table = build_heuristic_table(data.decode("utf-8", errors="ignore"), k, mode, index_bits)
    logger.debug("Indexed document: %d distinct keywords", len(table.records))
    return StorePackage(ciphertext=encrypt_document(data, k), table=table)


def verify_document(
    plaintext: bytes,
    table: HeuristicTable,
    k: OwnerKeyPair,
) -> dict:
    """
    Recompute the heuristic table from a decrypted document and compare.

    Returns:
        {"intact": bool, "missing": [...], "unexpected": [...]} with records as
        their serialized lines.
    """
    rebuilt = build_heuristic_table(
        plaintext.decode("utf-8", errors="ignore"),
        k,
        table.mode,
        index_bits_of(table.digest_algorithm_id),
    )
    expected = {_record_line(r) for r in rebuilt.records}
    actual = {_record_line(r) for r in table.records}
    missing = sorted(expected - actual)
    unexpected = sorted(actual - expected)
    return {
        "intact": not missing and not unexpected,
        "missing": missing,
        "unexpected": unexpected,
    }


# ---------------------------------------------------------------------------
# HT file format
# ---------------------------------------------------------------------------

def _record_line(r: HtRecord) -> str:
    return f"{r.index:016x} {r.ki} {r.ver_key}"


def serialize_ht(t: HeuristicTable) -> bytes:
    lines = [f"{HT_MAGIC} {HT_VERSION} {t.digest_algorithm_id} {t.mode.value}"]
    lines.extend(_record_line(r) for r in t.records)
    return ("\n".join(lines) + "\n").encode("utf-8")


_INDEX_RE = re.compile(r"[0-9a-f]{16}")


def _parse_decimal(text: str, what: str, line_no: int) -> int:
    if not is_minimal_decimal(text):
        raise FormatError(f"{what} {text!r} is not a minimal decimal", line_no)
    return int(text)


def parse_ht(data: bytes) -> HeuristicTable:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise FormatError("heuristic table is not UTF-8", 1) from e
    if not text.endswith("\n"):
        raise FormatError("missing final newline", text.count("\n") + 1)
    lines = text[:-1].split("\n")

    header = lines[0].split(" ")
    if len(header) != 4 or header[0] != HT_MAGIC or header[1] != HT_VERSION:
        raise FormatError(f"bad header {lines[0]!r}", 1)
    algorithm_id, mode_text = header[2], header[3]
    try:
        index_bits_of(algorithm_id)
        mode = EwMode(mode_text)
    except ValueError as e:
        raise FormatError(str(e), 1) from e

    records = []
    for line_no, line in enumerate(lines[1:], start=2):
        fields = line.split(" ")
        if len(fields) != 3:
            raise FormatError(f"expected 3 fields, got {len(fields)}", line_no)
        index_text, ki_text, ver_text = fields
        if not _INDEX_RE.fullmatch(index_text):
            raise FormatError(f"index {index_text!r} is not 16 lowercase hex chars", line_no)
        ki_value = _parse_decimal(ki_text, "ki", line_no)
        try:
            ver_key = VerKey.parse(ver_text)
        except ValueError as e:
            raise FormatError(str(e), line_no) from e
        try:
            records.append(HtRecord(index=int(index_text, 16), ki=ki_value, ver_key=ver_key))
        except ValidationError as e:
            raise FormatError(e.errors()[0]["msg"], line_no) from e

    return HeuristicTable(records=records, digest_algorithm_id=algorithm_id, mode=mode)
