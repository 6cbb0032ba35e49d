"""Pydantic models for heuristic-table rows and per-document tables."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.crypto import DocumentCiphertext, EwMode


# ---------------------------------------------------------------------------
# Verification key: (KI, digit sum of EW) pair
# ---------------------------------------------------------------------------

class VerKey(BaseModel):
    """Ver-Key as a pair; the canonical text form is ``<ki>|<digit_sum>``."""
    model_config = ConfigDict(frozen=True)

    ki: int = Field(ge=0)
    digit_sum: int = Field(ge=0)

    def __str__(self) -> str:
        return f"{self.ki}|{self.digit_sum}"

    @classmethod
    def parse(cls, text: str) -> VerKey:
        ki_text, sep, sum_text = text.partition("|")
        if not sep or not is_minimal_decimal(ki_text) or not is_minimal_decimal(sum_text):
            raise ValueError(f"malformed ver-key {text!r}")
        return cls(ki=int(ki_text), digit_sum=int(sum_text))


def is_minimal_decimal(text: str) -> bool:
    """ASCII digits with no leading zero, as every decimal HT column is written."""
    if not text.isascii() or not text.isdigit():
        return False
    return text == "0" or not text.startswith("0")


# ---------------------------------------------------------------------------
# Heuristic table: one row per distinct keyword of a document
# ---------------------------------------------------------------------------

class HtRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    index: int = Field(ge=0, lt=1 << 64)
    ki: int = Field(ge=0)
    ver_key: VerKey

    @model_validator(mode="after")
    def _ki_columns_agree(self) -> HtRecord:
        if self.ver_key.ki != self.ki:
            raise ValueError(
                f"ver_key ki {self.ver_key.ki} does not match ki column {self.ki}"
            )
        return self

    def sort_key(self) -> tuple[int, int, int]:
        return (self.index, self.ki, self.ver_key.digit_sum)


class HeuristicTable(BaseModel):
    """Per-document table shipped to the server alongside the ciphertext."""
    records: list[HtRecord] = Field(default_factory=list)
    digest_algorithm_id: str
    mode: EwMode


class StorePackage(BaseModel):
    """What the owner uploads for one document."""
    ciphertext: DocumentCiphertext
    table: HeuristicTable
