import random

import pytest

from ghsed.client_indexer import (
    build_heuristic_table,
    make_record,
    package_document,
    parse_ht,
    serialize_ht,
    tokenize,
    verify_document,
)
from ghsed.errors import FormatError
from ghsed.keyword_core import digit_sum, index_of, ki
from ghsed.owner_crypto import decrypt_document, encrypt_keyword
from models import EwMode, HeuristicTable, HtRecord, VerKey


def _random_text(rng: random.Random, words: int) -> str:
    """Mixed-case words from a small vocabulary, so repeats are common."""
    vocabulary = ["".join(rng.choices("abcdefghijklmnopqrstuvwxyz0123456789", k=rng.randint(1, 9)))
                  for _ in range(words // 3 + 1)]
    separators = [" ", "  ", ", ", ".\n", "-", "!? ", "\t"]
    parts = []
    for _ in range(words):
        w = rng.choice(vocabulary)
        parts.append(w.upper() if rng.random() < 0.2 else w)
        parts.append(rng.choice(separators))
    return "".join(parts)


class TestTokenize:
    def test_lowercases_and_splits(self):
        assert tokenize("Urgent: the URGENT report, 2024!") == ["urgent", "the", "urgent", "report", "2024"]

    def test_mixed_alphanumerics_stay_together(self):
        assert tokenize("q3-results v2.1") == ["q3", "results", "v2", "1"]

    def test_non_ascii_letters_split_tokens(self):
        assert tokenize("café naïve") == ["caf", "na", "ve"]
        assert tokenize("\u212aelvin") == ["elvin"]

    def test_truncates_long_runs(self):
        assert tokenize("x" * 70) == ["x" * 64]

    def test_empty(self):
        assert tokenize("") == []
        assert tokenize("--- !!! ---") == []


class TestBuildTable:
    def test_record_columns(self, owner_keys):
        r = make_record("urgent", owner_keys)
        assert r.index == index_of("urgent")
        assert r.ki == 288
        assert r.ver_key == VerKey(ki=288, digit_sum=digit_sum(encrypt_keyword("urgent", owner_keys)))

    def test_one_record_per_distinct_word(self, owner_keys):
        table = build_heuristic_table("report urgent Report weekly report", owner_keys)
        assert len(table.records) == 3
        assert table.digest_algorithm_id == "sha256"
        assert table.mode is EwMode.PUBLIC

    def test_repeated_word_gives_one_record(self, owner_keys):
        table = build_heuristic_table("word " * 10_000, owner_keys)
        assert table.records == [make_record("word", owner_keys)]

    def test_sorted(self, owner_keys):
        table = build_heuristic_table("alpha beta gamma delta epsilon zeta eta theta", owner_keys)
        keys = [r.sort_key() for r in table.records]
        assert keys == sorted(keys)

    @pytest.mark.parametrize("seed", range(5))
    def test_record_count_matches_distinct_tokens(self, owner_keys, seed):
        text = _random_text(random.Random(seed), 300)
        table = build_heuristic_table(text, owner_keys, index_bits=16)
        assert len(table.records) == len(set(tokenize(text)))
        assert {r.ki for r in table.records} == {ki(w) for w in tokenize(text)}

    @pytest.mark.parametrize("mode", list(EwMode))
    def test_serialization_is_deterministic(self, owner_keys, mode):
        text = _random_text(random.Random(7), 200)
        first = serialize_ht(build_heuristic_table(text, owner_keys, mode))
        second = serialize_ht(build_heuristic_table(text, owner_keys, mode))
        assert first == second
        assert serialize_ht(parse_ht(first)) == first

    def test_empty_document(self, owner_keys):
        table = build_heuristic_table("", owner_keys)
        assert table.records == []
        assert serialize_ht(table) == b"GHSED-HT v1 sha256 public\n"
        assert parse_ht(serialize_ht(table)) == table

    def test_test_mode_and_private_mode(self, owner_keys):
        table = build_heuristic_table("urgent", owner_keys, EwMode.PRIVATE, 16)
        assert table.digest_algorithm_id == "sha256t16"
        assert table.records[0].index == index_of("urgent", 16)
        assert table.records[0].ver_key.digit_sum == digit_sum(
            encrypt_keyword("urgent", owner_keys, EwMode.PRIVATE)
        )

    def test_package(self, owner_keys):
        data = "urgent report\n".encode() + b"\xff\xfe" + b" weekly"
        package = package_document(data, owner_keys)
        assert decrypt_document(package.ciphertext, owner_keys) == data
        assert {r.ki for r in package.table.records} == {ki("urgent"), ki("report"), ki("weekly")}


class TestHtFormat:
    def test_line_layout(self):
        table = HeuristicTable(
            records=[HtRecord(index=0xAB, ki=14, ver_key=VerKey(ki=14, digit_sum=15))],
            digest_algorithm_id="sha256",
            mode=EwMode.PUBLIC,
        )
        assert serialize_ht(table) == b"GHSED-HT v1 sha256 public\n00000000000000ab 14 14|15\n"

    def test_round_trip_large_table(self, owner_keys):
        words = " ".join(f"w{i}" for i in range(1000))
        table = build_heuristic_table(words, owner_keys)
        assert len(table.records) == 1000
        assert parse_ht(serialize_ht(table)) == table

    def test_ki_column_must_match_ver_key(self):
        data = b"GHSED-HT v1 sha256 public\n00000000000000ab 13 14|15\n"
        with pytest.raises(FormatError, match="line 2"):
            parse_ht(data)

    @pytest.mark.parametrize("data, line", [
        (b"GHSED-HT v1 sha256 public", 1),
        (b"GHSED-HT v2 sha256 public\n", 1),
        (b"GHSED-HT v1 md5 public\n", 1),
        (b"GHSED-HT v1 sha256 secret\n", 1),
        (b"GHSED-HT v1 sha256 public\n00000000000000AB 14 14|15\n", 2),
        (b"GHSED-HT v1 sha256 public\n00000000000000ab 014 14|15\n", 2),
        (b"GHSED-HT v1 sha256 public\n00000000000000ab 14 14-15\n", 2),
        (b"GHSED-HT v1 sha256 public\n00000000000000ab 14 14|015\n", 2),
        (b"GHSED-HT v1 sha256 public\n00000000000000ab 14 14|\n", 2),
        (b"GHSED-HT v1 sha256 public\n00000000000000ab 14  14|15\n", 2),
        (b"GHSED-HT v1 sha256 public\nab 14 14|15\n", 2),
        (b"GHSED-HT v1 sha256 public\n00000000000000ab 14 14|15\n00000000000000ac 5 5|x\n", 3),
        (b"GHSED-HT v1 sha256 public\n\xff\n", 1),
    ])
    def test_malformed(self, data, line):
        with pytest.raises(FormatError) as exc:
            parse_ht(data)
        assert exc.value.line == line


class TestVerifyDocument:
    def test_intact(self, owner_keys):
        text = b"urgent weekly report"
        result = verify_document(text, build_heuristic_table(text.decode(), owner_keys), owner_keys)
        assert result == {"intact": True, "missing": [], "unexpected": []}

    def test_detects_edited_document(self, owner_keys):
        table = build_heuristic_table("urgent weekly report", owner_keys)
        result = verify_document(b"urgent monthly report", table, owner_keys)
        assert not result["intact"]
        assert len(result["missing"]) == 1
        assert len(result["unexpected"]) == 1

    def test_uses_table_parameters(self, owner_keys):
        table = build_heuristic_table("urgent", owner_keys, EwMode.PRIVATE, 16)
        assert verify_document(b"urgent", table, owner_keys)["intact"]
