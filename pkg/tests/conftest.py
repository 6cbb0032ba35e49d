"""Shared fixtures: one owner key per session and small seeded corpora."""

import pytest

from ghsed.bench import gen_corpus
from ghsed.client_indexer import build_heuristic_table
from ghsed.ght_store import GhtStore
from ghsed.owner_crypto import keygen
from models import CorpusSpec, EwMode


@pytest.fixture(scope="session")
def owner_keys():
    return keygen(1024)


@pytest.fixture(scope="session")
def small_corpora():
    """Five seeded corpora of 40 documents over a 150-word vocabulary."""
    return [
        gen_corpus(CorpusSpec(document_count=40, words_per_document=8, vocabulary_size=150, seed=seed))
        for seed in range(5)
    ]


@pytest.fixture
def memory_store():
    return GhtStore(None, mode=EwMode.PUBLIC)


@pytest.fixture
def store_text(owner_keys):
    """Index plaintext with the session key and store it; returns the DocId."""

    def _store(store: GhtStore, text: str, ciphertext: bytes = b"") -> int:
        table = build_heuristic_table(text, owner_keys, store.mode, store.ght.index_bits)
        return store.store_document(ciphertext, table)

    return _store
