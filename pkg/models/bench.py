"""Pydantic models for benchmark corpora and reports."""

from __future__ import annotations

from pathlib import Path

import pandas as pd
from pydantic import BaseModel, Field, model_validator


class CorpusSpec(BaseModel):
    document_count: int = Field(ge=0)
    words_per_document: int = Field(ge=1)
    vocabulary_size: int = Field(ge=1)
    min_word_length: int = Field(default=4, ge=1, le=64)
    max_word_length: int = Field(default=10, ge=1, le=64)
    seed: int = 0

    @model_validator(mode="after")
    def _check_ranges(self) -> CorpusSpec:
        if self.min_word_length > self.max_word_length:
            raise ValueError("min_word_length exceeds max_word_length")
        if self.words_per_document > self.vocabulary_size:
            raise ValueError("words_per_document exceeds vocabulary_size")
        return self


class BenchRow(BaseModel):
    experiment: str
    document_count: int
    record_count: int
    index_bits: int = 64
    embed_ms: float | None = None
    search_mean_us: float | None = None
    search_median_us: float | None = None
    bucket_probes: int = 0
    chain_probes: int = 0
    table_probes: int = 0
    max_chain: int = 0
    mean_chain: float = 0.0
    triple_collisions: int = 0


class BenchReport(BaseModel):
    experiment: str
    seed: int
    rows: list[BenchRow] = Field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.model_dump() for r in self.rows])

    def to_csv(self, path: str | Path) -> str:
        """Write the rows as CSV; the header line names every column."""
        df = self.to_frame()
        df.to_csv(path, index=False)
        return str(path)

    def summary(self) -> str:
        df = self.to_frame()
        if df.empty:
            return f"{self.experiment}: no rows"
        return df.dropna(axis=1, how="all").to_string(index=False)
