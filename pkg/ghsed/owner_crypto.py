"""Owner key material and every cryptographic operation.

Keyword encryption (EW / T_ew) is raw, unpadded modular exponentiation so
that equal keywords give equal ciphertexts; documents use hybrid
RSA-OAEP + AES-GCM; trapdoors are signed with RSA-PSS.
"""

from __future__ import annotations

import hashlib
import logging
import os
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path

import yaml
from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import padding, rsa
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from config import INDEX_BITS, MIN_KEY_BITS
from ghsed.errors import (
    AuthenticityError,
    AuthorizationError,
    EncodingError,
    ParameterError,
)
from ghsed.keyword_core import Keyword, index_of, ki
from models import (
    DocumentCiphertext,
    EwMode,
    OwnerKeyPair,
    OwnerPublicKey,
    SignedTrapdoor,
    Trapdoor,
)

logger = logging.getLogger(__name__)

SIGNATURE_ALGORITHM = "rsa-pss-sha256"
_PUBLIC_EXPONENT = 65537
_PROBE = 2

_OAEP = padding.OAEP(
    mgf=padding.MGF1(algorithm=hashes.SHA256()),
    algorithm=hashes.SHA256(),
    label=None,
)
_PSS = padding.PSS(mgf=padding.MGF1(hashes.SHA256()), salt_length=padding.PSS.MAX_LENGTH)


# ---------------------------------------------------------------------------
# Keys
# ---------------------------------------------------------------------------

def _key_id(modulus: int, public_exponent: int) -> str:
    return hashlib.sha256(f"{modulus}:{public_exponent}".encode()).hexdigest()[:16]


def _from_private_key(private_key: rsa.RSAPrivateKey) -> OwnerKeyPair:
    numbers = private_key.private_numbers()
    n, e = numbers.public_numbers.n, numbers.public_numbers.e
    pair = OwnerKeyPair(
        modulus=n,
        public_exponent=e,
        private_exponent=numbers.d,
        prime_p=numbers.p,
        prime_q=numbers.q,
        key_id=_key_id(n, e),
    )
    if pow(pow(_PROBE, e, n), numbers.d, n) != _PROBE:
        raise ParameterError("generated key pair failed the exponent round-trip probe")
    return pair


def keygen(bits: int) -> OwnerKeyPair:
    if bits < MIN_KEY_BITS:
        raise ParameterError(f"key size must be at least {MIN_KEY_BITS} bits, got {bits}")
    private_key = rsa.generate_private_key(public_exponent=_PUBLIC_EXPONENT, key_size=bits)
    pair = _from_private_key(private_key)
    logger.info("Generated %d-bit owner key %s", bits, pair.key_id)
    return pair


@lru_cache(maxsize=32)
def _private_key(k: OwnerKeyPair) -> rsa.RSAPrivateKey:
    p, q, d = k.prime_p, k.prime_q, k.private_exponent
    numbers = rsa.RSAPrivateNumbers(
        p=p,
        q=q,
        d=d,
        dmp1=rsa.rsa_crt_dmp1(d, p),
        dmq1=rsa.rsa_crt_dmq1(d, q),
        iqmp=rsa.rsa_crt_iqmp(p, q),
        public_numbers=rsa.RSAPublicNumbers(k.public_exponent, k.modulus),
    )
    return numbers.private_key()


@lru_cache(maxsize=32)
def _public_key(k: OwnerPublicKey) -> rsa.RSAPublicKey:
    return rsa.RSAPublicNumbers(k.public_exponent, k.modulus).public_key()


def save_keys(k: OwnerKeyPair, key_dir: str | Path) -> dict[str, str]:
    """Write private.pem, public.pem and key.yaml; returns the paths."""
    key_dir = Path(key_dir)
    key_dir.mkdir(parents=True, exist_ok=True)
    private_key = _private_key(k)

    paths = {}
    private_path = key_dir / "private.pem"
    private_path.write_bytes(private_key.private_bytes(
        encoding=serialization.Encoding.PEM,
        format=serialization.PrivateFormat.PKCS8,
        encryption_algorithm=serialization.NoEncryption(),
    ))
    os.chmod(private_path, 0o600)
    paths["private"] = str(private_path)

    paths["public"] = save_public_key(k, key_dir)

    meta_path = key_dir / "key.yaml"
    meta = {
        "key_id": k.key_id,
        "bits": k.bits,
        "signature_algorithm": SIGNATURE_ALGORITHM,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    with open(meta_path, "w") as f:
        yaml.dump(meta, f, default_flow_style=False, sort_keys=False)
    paths["meta"] = str(meta_path)
    return paths


def save_public_key(k: OwnerPublicKey, key_dir: str | Path, name: str = "public.pem") -> str:
    path = Path(key_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(_public_key(k.public()).public_bytes(
        encoding=serialization.Encoding.PEM,
        format=serialization.PublicFormat.SubjectPublicKeyInfo,
    ))
    return str(path)


def load_keys(key_dir: str | Path) -> OwnerKeyPair:
    path = Path(key_dir) / "private.pem"
    if not path.exists():
        raise ParameterError(f"No private key found in {key_dir}")
    private_key = serialization.load_pem_private_key(path.read_bytes(), password=None)
    if not isinstance(private_key, rsa.RSAPrivateKey):
        raise ParameterError(f"{path} is not an RSA private key")
    return _from_private_key(private_key)


def load_public_key(path: str | Path) -> OwnerPublicKey:
    """Accepts a key directory (reads public.pem) or a PEM file path."""
    path = Path(path)
    if path.is_dir():
        path = path / "public.pem"
    if not path.exists():
        raise ParameterError(f"No public key found at {path}")
    public_key = serialization.load_pem_public_key(path.read_bytes())
    if not isinstance(public_key, rsa.RSAPublicKey):
        raise ParameterError(f"{path} is not an RSA public key")
    numbers = public_key.public_numbers()
    return OwnerPublicKey(
        modulus=numbers.n,
        public_exponent=numbers.e,
        key_id=_key_id(numbers.n, numbers.e),
    )


# ---------------------------------------------------------------------------
# Keyword encryption (EW)
# ---------------------------------------------------------------------------

def encode_keyword(w: str) -> int:
    """Big-endian integer of the keyword's UTF-8 bytes."""
    return int.from_bytes(Keyword(w).encode("utf-8"), "big")


def _exponents(k: OwnerPublicKey, mode: EwMode) -> tuple[int, int | None]:
    """(forward, inverse) exponents for the mode; inverse is None without the private key."""
    mode = EwMode(mode)
    if not isinstance(k, OwnerKeyPair):
        if mode is EwMode.PUBLIC:
            return k.public_exponent, None
        raise ParameterError("private-exponent mode needs the owner's private key")
    if mode is EwMode.PUBLIC:
        return k.public_exponent, k.private_exponent
    return k.private_exponent, k.public_exponent


def encrypt_keyword(w: str, k: OwnerPublicKey, mode: EwMode = EwMode.PUBLIC) -> int:
    m = encode_keyword(w)
    if m >= k.modulus:
        raise EncodingError(f"keyword encoding does not fit below the {k.bits}-bit modulus")
    exponent, _ = _exponents(k, mode)
    return pow(m, exponent, k.modulus)


def invert_keyword(c: int, k: OwnerKeyPair, mode: EwMode = EwMode.PUBLIC) -> int:
    """Apply the inverse exponent; recovers encode_keyword(w)."""
    _, inverse = _exponents(k, mode)
    if inverse is None:
        raise ParameterError("inverting a keyword ciphertext needs the owner's private key")
    return pow(c, inverse, k.modulus)


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------

def encrypt_document(plaintext: bytes, k: OwnerPublicKey) -> DocumentCiphertext:
    content_key = AESGCM.generate_key(bit_length=256)
    nonce = os.urandom(12)
    wrapped_key = _public_key(k.public()).encrypt(content_key, _OAEP)
    payload = AESGCM(content_key).encrypt(nonce, plaintext, wrapped_key)
    return DocumentCiphertext(wrapped_key=wrapped_key, payload=payload, nonce=nonce)


def decrypt_document(c: DocumentCiphertext, k: OwnerKeyPair) -> bytes:
    try:
        content_key = _private_key(k).decrypt(c.wrapped_key, _OAEP)
    except ValueError as e:
        raise AuthenticityError("content key unwrap failed") from e
    try:
        return AESGCM(content_key).decrypt(c.nonce, c.payload, c.wrapped_key)
    except (InvalidTag, ValueError) as e:
        raise AuthenticityError("document payload failed authentication") from e


# ---------------------------------------------------------------------------
# Trapdoors
# ---------------------------------------------------------------------------

def build_trapdoor(
    w: str,
    k: OwnerPublicKey,
    mode: EwMode = EwMode.PUBLIC,
    index_bits: int = INDEX_BITS,
) -> Trapdoor:
    """Unsigned trapdoor for in-process search."""
    return Trapdoor(
        t_ew=encrypt_keyword(w, k, mode),
        t_ki=ki(w),
        t_index=index_of(w, index_bits),
    )


def sign_trapdoor(td: Trapdoor, k: OwnerKeyPair) -> SignedTrapdoor:
    signature = _private_key(k).sign(td.canonical_bytes(), _PSS, hashes.SHA256())
    return SignedTrapdoor(
        trapdoor=td,
        signature=signature,
        key_id=k.key_id,
        algorithm=SIGNATURE_ALGORITHM,
    )


def make_trapdoor(
    w: str,
    k: OwnerKeyPair,
    mode: EwMode = EwMode.PUBLIC,
    index_bits: int = INDEX_BITS,
) -> SignedTrapdoor:
    return sign_trapdoor(build_trapdoor(w, k, mode, index_bits), k)


def verify_trapdoor(st: SignedTrapdoor, owner_pub: OwnerPublicKey) -> Trapdoor:
    if st.algorithm != SIGNATURE_ALGORITHM:
        raise AuthorizationError(f"unsupported signature algorithm {st.algorithm!r}")
    if st.key_id != owner_pub.key_id:
        raise AuthorizationError("trapdoor signed by an unknown key")
    try:
        _public_key(owner_pub.public()).verify(
            st.signature, st.trapdoor.canonical_bytes(), _PSS, hashes.SHA256()
        )
    except InvalidSignature:
        raise AuthorizationError("trapdoor signature does not verify") from None
    return st.trapdoor
