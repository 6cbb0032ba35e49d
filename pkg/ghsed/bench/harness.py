"""Desk-scale experiments: embed growth, flat search, per-document baseline, collisions.

Timings are in-process (no network); probe counters are reported next to
wall time because they are the noise-free form of each curve.
"""

from __future__ import annotations

import logging
import string
import time
from collections.abc import Callable, Sequence

import numpy as np

from config import BENCH_REPEAT, BENCH_SIZES, BENCH_WARMUP, INDEX_BITS
from ghsed.client_indexer import make_record, tokenize
from ghsed.ght_store import GhtStore, GlobalHeuristicTable
from ghsed.keyword_core import digest_algorithm_id
from ghsed.owner_crypto import build_trapdoor
from models import (
    BenchReport,
    BenchRow,
    CorpusSpec,
    EwMode,
    HeuristicTable,
    HtRecord,
    OwnerPublicKey,
)

logger = logging.getLogger(__name__)

PROBE_WORD = "ghsedprobe"
_LETTERS = np.array(list(string.ascii_lowercase))


# ---------------------------------------------------------------------------
# Corpora
# ---------------------------------------------------------------------------

def make_vocabulary(spec: CorpusSpec) -> list[str]:
    """Distinct lowercase words, deterministic in spec.seed."""
    rng = np.random.default_rng([spec.seed, 0])
    words: dict[str, None] = {}
    while len(words) < spec.vocabulary_size:
        length = int(rng.integers(spec.min_word_length, spec.max_word_length + 1))
        word = "".join(rng.choice(_LETTERS, size=length))
        if word != PROBE_WORD:
            words[word] = None
    return list(words)


def gen_corpus(spec: CorpusSpec) -> list[str]:
    vocabulary = make_vocabulary(spec)
    rng = np.random.default_rng([spec.seed, 1])
    documents = []
    for _ in range(spec.document_count):
        picks = rng.choice(len(vocabulary), size=spec.words_per_document, replace=False)
        documents.append(" ".join(vocabulary[i] for i in picks))
    return documents


def scan_oracle(documents: Sequence[str], word: str) -> set[int]:
    """Brute-force plaintext scan; DocIds are 1-based positions."""
    return {d for d, text in enumerate(documents, start=1) if word in set(tokenize(text))}


class RecordFactory:
    """Memoized HtRecord construction (one modexp per distinct word)."""

    def __init__(self, keys: OwnerPublicKey, mode: EwMode = EwMode.PUBLIC, index_bits: int = INDEX_BITS):
        self.keys = keys
        self.mode = EwMode(mode)
        self.index_bits = index_bits
        self._cache: dict[str, HtRecord] = {}

    def record(self, word: str) -> HtRecord:
        r = self._cache.get(word)
        if r is None:
            r = make_record(word, self.keys, self.mode, self.index_bits)
            self._cache[word] = r
        return r

    def table(self, text: str) -> HeuristicTable:
        records = sorted(
            (self.record(w) for w in dict.fromkeys(tokenize(text))),
            key=HtRecord.sort_key,
        )
        return HeuristicTable(
            records=records,
            digest_algorithm_id=digest_algorithm_id(self.index_bits),
            mode=self.mode,
        )


def load_corpus(documents: Sequence[str], factory: RecordFactory) -> GhtStore:
    """In-memory store holding the corpus as DocIds 1..n."""
    store = GhtStore(None, index_bits=factory.index_bits, mode=factory.mode)
    for text in documents:
        store.store_document(b"", factory.table(text))
    return store


# ---------------------------------------------------------------------------
# Timing
# ---------------------------------------------------------------------------

def _time_us(fn: Callable[[], object], warmup: int, repeat: int) -> np.ndarray:
    for _ in range(warmup):
        fn()
    samples = np.empty(repeat)
    for i in range(repeat):
        t0 = time.perf_counter_ns()
        fn()
        samples[i] = (time.perf_counter_ns() - t0) / 1_000
    return samples


def default_specs(experiment: str, sizes: Sequence[int] = BENCH_SIZES, seed: int = 0) -> list[CorpusSpec]:
    """Embed: one document of n records. Search/baseline: n records in 10-word documents."""
    if experiment == "embed":
        return [
            CorpusSpec(document_count=1, words_per_document=n, vocabulary_size=n, seed=seed)
            for n in sizes
        ]
    words = 10
    return [
        CorpusSpec(
            document_count=max(1, n // words),
            words_per_document=words,
            vocabulary_size=max(words, min(n, 10_000)),
            seed=seed,
        )
        for n in sizes
    ]


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

def run_embed_experiment(
    specs: Sequence[CorpusSpec],
    keys: OwnerPublicKey,
    mode: EwMode = EwMode.PUBLIC,
    warmup: int = BENCH_WARMUP,
    repeat: int = BENCH_REPEAT,
) -> BenchReport:
    """Time embedding one document's HT into an empty GHT, per table size."""
    factory = RecordFactory(keys, mode)
    report = BenchReport(experiment="embed", seed=specs[0].seed if specs else 0)
    for spec in specs:
        records = []
        for text in gen_corpus(spec):
            records.extend(factory.table(text).records)

        ght_holder: list[GlobalHeuristicTable] = []

        def embed_once():
            ght = GlobalHeuristicTable(factory.index_bits)
            ght.embed(records, 1)
            ght_holder[:] = [ght]

        samples = _time_us(embed_once, warmup, repeat)
        stats = ght_holder[0].stats()
        report.rows.append(BenchRow(
            experiment="embed",
            document_count=spec.document_count,
            record_count=len(records),
            index_bits=factory.index_bits,
            embed_ms=float(np.median(samples)) / 1_000,
            bucket_probes=stats.embed_bucket_probes,
            chain_probes=stats.embed_chain_probes,
            max_chain=stats.max_chain,
            mean_chain=stats.mean_chain,
        ))
        logger.info("embed: %d records in %.3f ms", len(records), report.rows[-1].embed_ms)
    return report


def _query_experiment(
    experiment: str,
    specs: Sequence[CorpusSpec],
    keys: OwnerPublicKey,
    mode: EwMode,
    warmup: int,
    repeat: int,
) -> BenchReport:
    factory = RecordFactory(keys, mode)
    trapdoor = build_trapdoor(PROBE_WORD, keys, mode, factory.index_bits)
    report = BenchReport(experiment=experiment, seed=specs[0].seed if specs else 0)
    for spec in specs:
        documents = gen_corpus(spec)
        # the fixed probe word lives in the first document of every corpus
        if documents:
            documents[0] = f"{documents[0]} {PROBE_WORD}"
        store = load_corpus(documents, factory)
        record_count = sum(len(factory.table(t).records) for t in documents)

        query = store.baseline_scan if experiment == "baseline" else store.search
        samples = _time_us(lambda: query(trapdoor), warmup, repeat)

        store.ght.reset_counters()
        query(trapdoor)
        stats = store.stats()
        report.rows.append(BenchRow(
            experiment=experiment,
            document_count=len(documents),
            record_count=record_count,
            index_bits=factory.index_bits,
            search_mean_us=float(samples.mean()),
            search_median_us=float(np.median(samples)),
            bucket_probes=stats.search_bucket_probes,
            chain_probes=(
                stats.baseline_chain_probes if experiment == "baseline" else stats.search_chain_probes
            ),
            table_probes=stats.baseline_table_probes,
            max_chain=stats.max_chain,
            mean_chain=stats.mean_chain,
        ))
        logger.info(
            "%s: %d records / %d docs, median %.2f us",
            experiment, record_count, len(documents), report.rows[-1].search_median_us,
        )
    return report


def run_search_experiment(
    specs: Sequence[CorpusSpec],
    keys: OwnerPublicKey,
    mode: EwMode = EwMode.PUBLIC,
    warmup: int = BENCH_WARMUP,
    repeat: int = BENCH_REPEAT,
) -> BenchReport:
    return _query_experiment("search", specs, keys, mode, warmup, repeat)


def run_baseline_experiment(
    specs: Sequence[CorpusSpec],
    keys: OwnerPublicKey,
    mode: EwMode = EwMode.PUBLIC,
    warmup: int = BENCH_WARMUP,
    repeat: int = BENCH_REPEAT,
) -> BenchReport:
    return _query_experiment("baseline", specs, keys, mode, warmup, repeat)


def count_triple_collisions(words: Sequence[str], factory: RecordFactory) -> int:
    """Distinct words whose (IndexKey, KI, digit sum) triple equals another word's."""
    groups: dict[tuple[int, int, int], int] = {}
    for w in set(words):
        r = factory.record(w)
        key = (r.index, r.ki, r.ver_key.digit_sum)
        groups[key] = groups.get(key, 0) + 1
    return sum(n for n in groups.values() if n > 1)


def run_collision_experiment(
    specs: Sequence[CorpusSpec],
    keys: OwnerPublicKey,
    mode: EwMode = EwMode.PUBLIC,
    index_widths: Sequence[int] = (16, 64),
) -> BenchReport:
    """Chain lengths and triple collisions as the index width shrinks."""
    report = BenchReport(experiment="collisions", seed=specs[0].seed if specs else 0)
    for spec in specs:
        documents = gen_corpus(spec)
        vocabulary = make_vocabulary(spec)
        for bits in index_widths:
            factory = RecordFactory(keys, mode, bits)
            store = load_corpus(documents, factory)
            store.ght.reset_counters()
            for w in vocabulary:
                store.search(build_trapdoor(w, keys, mode, bits))
            stats = store.stats()
            report.rows.append(BenchRow(
                experiment="collisions",
                document_count=len(documents),
                record_count=stats.record_count,
                index_bits=bits,
                chain_probes=stats.search_chain_probes,
                bucket_probes=stats.search_bucket_probes,
                max_chain=stats.max_chain,
                mean_chain=stats.mean_chain,
                triple_collisions=count_triple_collisions(vocabulary, factory),
            ))
    return report


EXPERIMENTS = {
    "embed": run_embed_experiment,
    "search": run_search_experiment,
    "baseline": run_baseline_experiment,
    "collisions": run_collision_experiment,
}
