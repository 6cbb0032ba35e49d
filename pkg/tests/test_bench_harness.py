import numpy as np
import pytest

from ghsed.bench import (
    default_specs,
    gen_corpus,
    make_vocabulary,
    run_baseline_experiment,
    run_collision_experiment,
    run_embed_experiment,
    run_search_experiment,
    scan_oracle,
)
from ghsed.bench.harness import PROBE_WORD, RecordFactory, count_triple_collisions, load_corpus
from ghsed.owner_crypto import build_trapdoor
from models import BenchReport, BenchRow, CorpusSpec


def _assert_matches_oracle(documents, vocabulary, factory, keys):
    """search == brute-force scan; any difference must be a shared (IndexKey, KI, DigitSum) triple."""
    store = load_corpus(documents, factory)
    triples: dict[tuple[int, int, int], int] = {}
    for w in vocabulary:
        r = factory.record(w)
        triples[(r.index, r.ki, r.ver_key.digit_sum)] = triples.get((r.index, r.ki, r.ver_key.digit_sum), 0) + 1
    for w in vocabulary:
        found = store.search(build_trapdoor(w, keys, factory.mode, factory.index_bits))
        expected = scan_oracle(documents, w)
        assert expected <= found, f"false negative for {w!r}"
        if found != expected:
            r = factory.record(w)
            assert triples[(r.index, r.ki, r.ver_key.digit_sum)] > 1, f"unexplained extra hits for {w!r}"


class TestCorpus:
    def test_deterministic_in_seed(self):
        spec = CorpusSpec(document_count=20, words_per_document=5, vocabulary_size=50, seed=3)
        assert gen_corpus(spec) == gen_corpus(spec)
        assert gen_corpus(spec) != gen_corpus(spec.model_copy(update={"seed": 4}))

    def test_vocabulary_shape(self):
        spec = CorpusSpec(document_count=1, words_per_document=1, vocabulary_size=300, seed=0)
        vocabulary = make_vocabulary(spec)
        assert len(vocabulary) == len(set(vocabulary)) == 300
        assert all(4 <= len(w) <= 10 and w.isalpha() and w.islower() for w in vocabulary)
        assert PROBE_WORD not in vocabulary

    def test_documents_use_distinct_words(self):
        spec = CorpusSpec(document_count=30, words_per_document=10, vocabulary_size=40, seed=1)
        for text in gen_corpus(spec):
            assert len(set(text.split())) == 10

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            CorpusSpec(document_count=1, words_per_document=5, vocabulary_size=4)
        with pytest.raises(ValueError):
            CorpusSpec(document_count=1, words_per_document=1, vocabulary_size=1, min_word_length=8, max_word_length=4)

    def test_single_word_vocabulary(self, owner_keys):
        spec = CorpusSpec(document_count=3, words_per_document=1, vocabulary_size=1, seed=2)
        documents = gen_corpus(spec)
        assert len(set(documents)) == 1
        store = load_corpus(documents, RecordFactory(owner_keys))
        assert store.search(build_trapdoor(documents[0], owner_keys)) == {1, 2, 3}


class TestOracle:
    def test_seeded_corpora(self, owner_keys):
        factory = RecordFactory(owner_keys)
        for seed in range(5):
            spec = CorpusSpec(document_count=100, words_per_document=10, vocabulary_size=500, seed=seed)
            _assert_matches_oracle(gen_corpus(spec), make_vocabulary(spec), factory, owner_keys)

    def test_oracle_itself(self):
        documents = ["urgent report", "weekly report", "Report"]
        assert scan_oracle(documents, "report") == {1, 2, 3}
        assert scan_oracle(documents, "urgent") == {1}
        assert scan_oracle(documents, "rep") == set()

    @pytest.mark.slow
    def test_fifty_full_size_corpora(self, owner_keys):
        factory = RecordFactory(owner_keys)
        for seed in range(50):
            spec = CorpusSpec(document_count=1000, words_per_document=10, vocabulary_size=10_000, seed=seed)
            _assert_matches_oracle(gen_corpus(spec), make_vocabulary(spec), factory, owner_keys)


class TestExperimentShapes:
    SIZES = [100, 1_000, 10_000]

    def test_default_specs(self):
        embed = default_specs("embed", [100], seed=5)
        assert embed == [CorpusSpec(document_count=1, words_per_document=100, vocabulary_size=100, seed=5)]
        search = default_specs("search", [100, 100_000])
        assert [s.document_count for s in search] == [10, 10_000]
        assert [s.vocabulary_size for s in search] == [100, 10_000]

    def test_embed_probes_equal_records(self, owner_keys):
        report = run_embed_experiment(default_specs("embed", self.SIZES), owner_keys, warmup=0, repeat=1)
        assert [r.record_count for r in report.rows] == self.SIZES
        for row in report.rows:
            assert row.bucket_probes == row.record_count
            assert row.chain_probes == 0
            assert row.max_chain == 1
            assert row.embed_ms > 0

    def test_search_probes_constant(self, owner_keys):
        report = run_search_experiment(default_specs("search", self.SIZES), owner_keys, warmup=1, repeat=3)
        assert len(report.rows) == 3
        assert all(r.bucket_probes == 1 for r in report.rows)
        assert len({r.chain_probes for r in report.rows}) == 1
        assert report.rows[0].record_count < report.rows[-1].record_count

    def test_baseline_probes_grow(self, owner_keys):
        report = run_baseline_experiment(default_specs("search", self.SIZES), owner_keys, warmup=1, repeat=3)
        probes = [r.table_probes for r in report.rows]
        assert probes == [r.document_count for r in report.rows]
        assert probes[-1] >= 10 * probes[0]

    def test_collision_experiment(self, owner_keys):
        report = run_collision_experiment(default_specs("search", [1_000]), owner_keys)
        by_width = {r.index_bits: r for r in report.rows}
        assert set(by_width) == {16, 64}
        assert by_width[64].triple_collisions == 0
        assert by_width[64].max_chain == 1
        assert by_width[16].max_chain >= by_width[64].max_chain
        assert by_width[16].bucket_probes == by_width[64].bucket_probes == 1_000

    def test_triple_collisions_count_duplicates(self, owner_keys):
        factory = RecordFactory(owner_keys)
        assert count_triple_collisions(["alpha", "beta", "alpha"], factory) == 0


class TestReport:
    def test_csv_header_names_columns(self, tmp_path):
        report = BenchReport(experiment="search", seed=0, rows=[
            BenchRow(experiment="search", document_count=10, record_count=100, search_median_us=3.5),
        ])
        path = report.to_csv(tmp_path / "search.csv")
        header = (tmp_path / "search.csv").read_text().splitlines()[0].split(",")
        assert path.endswith("search.csv")
        assert {"experiment", "record_count", "search_median_us", "chain_probes"} <= set(header)
        assert "search_median_us" in report.summary()
        assert "embed_ms" not in report.summary()

    def test_empty_summary(self):
        assert BenchReport(experiment="embed", seed=0).summary() == "embed: no rows"


@pytest.mark.slow
class TestTimingShapes:
    def test_search_time_flat(self, owner_keys):
        report = run_search_experiment(default_specs("search", [1_000, 100_000]), owner_keys)
        medians = [r.search_median_us for r in report.rows]
        assert max(medians) < 3 * min(medians)

    def test_baseline_time_grows(self, owner_keys):
        report = run_baseline_experiment(default_specs("search", [1_000, 100_000]), owner_keys)
        assert report.rows[-1].search_median_us >= 10 * report.rows[0].search_median_us

    def test_embed_time_monotone(self, owner_keys):
        report = run_embed_experiment(default_specs("embed", [100, 1_000, 10_000, 100_000]), owner_keys)
        times = np.array([r.embed_ms for r in report.rows])
        assert np.count_nonzero(np.diff(times) < 0) <= 1
        assert all(r.bucket_probes == r.record_count for r in report.rows)
