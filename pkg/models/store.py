"""Pydantic models for the server-side registry and GHT counters."""

from __future__ import annotations

from pydantic import BaseModel, Field


class DocLocator(BaseModel):
    """Where a stored document and its heuristic table live."""
    ciphertext_path: str
    ht_path: str
    byte_size: int


class DocRegistry(BaseModel):
    entries: dict[int, DocLocator] = Field(default_factory=dict)
    next_id: int = 1

    def __contains__(self, doc_id: int) -> bool:
        return doc_id in self.entries


class GhtStats(BaseModel):
    """Instrumentation counters.

    Embed probes split into bucket lookups (one per record) and chain
    comparisons; search probes are chain comparisons within one bucket.
    """
    bucket_count: int = 0
    record_count: int = 0
    max_chain: int = 0
    mean_chain: float = 0.0

    embed_ops: int = 0
    embed_bucket_probes: int = 0
    embed_chain_probes: int = 0

    search_ops: int = 0
    search_bucket_probes: int = 0
    search_chain_probes: int = 0
    search_bitmap_reads: int = 0

    last_search_buckets: int = 0
    last_search_chain_probes: int = 0
    last_search_bitmaps: int = 0

    baseline_ops: int = 0
    baseline_table_probes: int = 0
    baseline_chain_probes: int = 0
