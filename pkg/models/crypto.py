"""Pydantic models for owner key material, ciphertexts and trapdoors."""

from __future__ import annotations

import struct
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field

from ghsed.errors import FormatError


class EwMode(str, Enum):
    """Which exponent encrypts keywords (EW / T_ew)."""
    PUBLIC = "public"
    PRIVATE = "private"


# ---------------------------------------------------------------------------
# Key material
# ---------------------------------------------------------------------------

class OwnerPublicKey(BaseModel):
    model_config = ConfigDict(frozen=True)

    modulus: int
    public_exponent: int
    key_id: str

    @property
    def bits(self) -> int:
        return self.modulus.bit_length()

    def public(self) -> OwnerPublicKey:
        return OwnerPublicKey(
            modulus=self.modulus,
            public_exponent=self.public_exponent,
            key_id=self.key_id,
        )


class OwnerKeyPair(OwnerPublicKey):
    private_exponent: int = Field(repr=False)
    prime_p: int = Field(repr=False)
    prime_q: int = Field(repr=False)


# ---------------------------------------------------------------------------
# Document ciphertext: hybrid: RSA-OAEP wrapped key + AES-GCM payload
# ---------------------------------------------------------------------------

_DOC_MAGIC = b"GHSEDDC1"


class DocumentCiphertext(BaseModel):
    model_config = ConfigDict(frozen=True)

    wrapped_key: bytes
    payload: bytes
    nonce: bytes

    def to_bytes(self) -> bytes:
        return b"".join([
            _DOC_MAGIC,
            struct.pack(">H", len(self.wrapped_key)),
            self.wrapped_key,
            struct.pack(">B", len(self.nonce)),
            self.nonce,
            self.payload,
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> DocumentCiphertext:
        if not data.startswith(_DOC_MAGIC):
            raise FormatError("document ciphertext: bad magic")
        pos = len(_DOC_MAGIC)
        try:
            (key_len,) = struct.unpack_from(">H", data, pos)
            pos += 2
            wrapped_key = data[pos:pos + key_len]
            pos += key_len
            (nonce_len,) = struct.unpack_from(">B", data, pos)
            pos += 1
            nonce = data[pos:pos + nonce_len]
            pos += nonce_len
        except struct.error as e:
            raise FormatError(f"document ciphertext: truncated header ({e})") from e
        if len(wrapped_key) != key_len or len(nonce) != nonce_len:
            raise FormatError("document ciphertext: truncated header")
        return cls(wrapped_key=wrapped_key, nonce=nonce, payload=data[pos:])


# ---------------------------------------------------------------------------
# Trapdoors
# ---------------------------------------------------------------------------

TRAPDOOR_HEADER = "GHSED-TD v1"


class Trapdoor(BaseModel):
    """Query token. ``t_index`` is the client-computed bucket key."""
    model_config = ConfigDict(frozen=True)

    t_ew: int = Field(ge=0)
    t_ki: int = Field(ge=0)
    t_index: int = Field(ge=0, lt=1 << 64)

    def canonical_bytes(self) -> bytes:
        return (
            f"{TRAPDOOR_HEADER}\n{self.t_ew}\n{self.t_ki}\n{self.t_index:016x}\n"
        ).encode("utf-8")

    @classmethod
    def from_canonical(cls, data: bytes) -> Trapdoor:
        try:
            lines = data.decode("utf-8").split("\n")
        except UnicodeDecodeError as e:
            raise FormatError("trapdoor: not UTF-8") from e
        if len(lines) != 5 or lines[0] != TRAPDOOR_HEADER or lines[4] != "":
            raise FormatError("trapdoor: bad layout")
        try:
            td = cls(t_ew=int(lines[1]), t_ki=int(lines[2]), t_index=int(lines[3], 16))
        except ValueError as e:
            raise FormatError(f"trapdoor: {e}") from e
        # only the exact canonical form is accepted
        if td.canonical_bytes() != data:
            raise FormatError("trapdoor: non-canonical encoding")
        return td


class SignedTrapdoor(BaseModel):
    model_config = ConfigDict(frozen=True)

    trapdoor: Trapdoor
    signature: bytes
    key_id: str
    algorithm: str = "rsa-pss-sha256"

    def to_bytes(self) -> bytes:
        canonical = self.trapdoor.canonical_bytes()
        algorithm = self.algorithm.encode("ascii")
        key_id = self.key_id.encode("ascii")
        return b"".join([
            struct.pack(">I", len(canonical)), canonical,
            struct.pack(">B", len(algorithm)), algorithm,
            struct.pack(">B", len(key_id)), key_id,
            struct.pack(">H", len(self.signature)), self.signature,
        ])

    @classmethod
    def from_bytes(cls, data: bytes) -> SignedTrapdoor:
        pos = 0
        fields = []
        try:
            for fmt in (">I", ">B", ">B", ">H"):
                (size,) = struct.unpack_from(fmt, data, pos)
                pos += struct.calcsize(fmt)
                chunk = data[pos:pos + size]
                if len(chunk) != size:
                    raise FormatError("signed trapdoor: truncated")
                fields.append(chunk)
                pos += size
        except struct.error as e:
            raise FormatError(f"signed trapdoor: truncated ({e})") from e
        if pos != len(data):
            raise FormatError("signed trapdoor: trailing bytes")
        canonical, algorithm, key_id, signature = fields
        try:
            return cls(
                trapdoor=Trapdoor.from_canonical(canonical),
                algorithm=algorithm.decode("ascii"),
                key_id=key_id.decode("ascii"),
                signature=signature,
            )
        except UnicodeDecodeError as e:
            raise FormatError("signed trapdoor: non-ASCII identifier") from e
