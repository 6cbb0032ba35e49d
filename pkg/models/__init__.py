from .crypto import (
    EwMode,
    OwnerPublicKey,
    OwnerKeyPair,
    DocumentCiphertext,
    Trapdoor,
    SignedTrapdoor,
)
from .heuristic import (
    VerKey,
    HtRecord,
    HeuristicTable,
    StorePackage,
)
from .store import DocLocator, DocRegistry, GhtStats
from .bench import CorpusSpec, BenchRow, BenchReport

__all__ = [
    "EwMode",
    "OwnerPublicKey",
    "OwnerKeyPair",
    "DocumentCiphertext",
    "Trapdoor",
    "SignedTrapdoor",
    "VerKey",
    "HtRecord",
    "HeuristicTable",
    "StorePackage",
    "DocLocator",
    "DocRegistry",
    "GhtStats",
    "CorpusSpec",
    "BenchRow",
    "BenchReport",
]
