import random

import pytest
import yaml

from ghsed.errors import AuthenticityError, AuthorizationError, EncodingError, FormatError, ParameterError
from ghsed.keyword_core import ALPHABET, index_of, ki
from ghsed.owner_crypto import (
    SIGNATURE_ALGORITHM,
    build_trapdoor,
    decrypt_document,
    encode_keyword,
    encrypt_document,
    encrypt_keyword,
    invert_keyword,
    keygen,
    load_keys,
    load_public_key,
    make_trapdoor,
    save_keys,
    verify_trapdoor,
)
from models import DocumentCiphertext, EwMode, OwnerKeyPair, OwnerPublicKey, SignedTrapdoor, Trapdoor

# textbook RSA: p=61, q=53
TOY_PUBLIC = OwnerPublicKey(modulus=3233, public_exponent=17, key_id="toy")
TOY_PAIR = OwnerKeyPair(
    modulus=3233, public_exponent=17, private_exponent=2753, prime_p=61, prime_q=53, key_id="toy"
)


def _flip_bit(data: bytes, bit: int) -> bytes:
    out = bytearray(data)
    out[bit // 8] ^= 1 << (bit % 8)
    return bytes(out)


class TestKeys:
    def test_keygen_shape(self, owner_keys):
        assert owner_keys.bits == 1024
        assert owner_keys.public_exponent == 65537
        assert owner_keys.prime_p * owner_keys.prime_q == owner_keys.modulus
        assert len(owner_keys.key_id) == 16

    def test_too_small(self):
        with pytest.raises(ParameterError):
            keygen(512)

    def test_public_view_drops_secrets(self, owner_keys):
        pub = owner_keys.public()
        assert type(pub) is OwnerPublicKey
        assert pub.key_id == owner_keys.key_id
        assert str(owner_keys.private_exponent) not in repr(owner_keys)

    def test_save_and_load(self, owner_keys, tmp_path):
        paths = save_keys(owner_keys, tmp_path / "keys")
        assert set(paths) == {"private", "public", "meta"}
        loaded = load_keys(tmp_path / "keys")
        assert loaded == owner_keys
        assert load_public_key(tmp_path / "keys") == owner_keys.public()
        assert load_public_key(paths["public"]) == owner_keys.public()
        meta = yaml.safe_load((tmp_path / "keys" / "key.yaml").read_text())
        assert meta["key_id"] == owner_keys.key_id
        assert meta["bits"] == 1024
        assert meta["signature_algorithm"] == SIGNATURE_ALGORITHM

    def test_load_missing(self, tmp_path):
        with pytest.raises(ParameterError):
            load_keys(tmp_path)
        with pytest.raises(ParameterError):
            load_public_key(tmp_path / "nothing.pem")


class TestKeywordEncryption:
    def test_textbook_oracle(self):
        assert pow(65, 17, 3233) == 2790
        assert encode_keyword("a") == 97
        assert encrypt_keyword("a", TOY_PUBLIC) == pow(97, 17, 3233)
        assert invert_keyword(encrypt_keyword("a", TOY_PAIR), TOY_PAIR) == 97

    def test_private_mode_on_toy_key(self):
        c = encrypt_keyword("a", TOY_PAIR, EwMode.PRIVATE)
        assert c == pow(97, 2753, 3233)
        assert invert_keyword(c, TOY_PAIR, EwMode.PRIVATE) == 97

    def test_encoding_must_fit_modulus(self):
        with pytest.raises(EncodingError):
            encrypt_keyword("abc", TOY_PUBLIC)

    def test_private_mode_needs_private_key(self, owner_keys):
        with pytest.raises(ParameterError):
            encrypt_keyword("report", owner_keys.public(), EwMode.PRIVATE)

    def test_inversion_needs_private_key(self, owner_keys):
        c = encrypt_keyword("a", TOY_PUBLIC)
        with pytest.raises(ParameterError):
            invert_keyword(c, TOY_PUBLIC)
        with pytest.raises(ParameterError):
            invert_keyword(encrypt_keyword("report", owner_keys), owner_keys.public())

    def test_matches_builtin_pow(self, owner_keys):
        m = int.from_bytes(b"urgent", "big")
        assert encrypt_keyword("urgent", owner_keys) == pow(m, 65537, owner_keys.modulus)
        assert encrypt_keyword("urgent", owner_keys, EwMode.PRIVATE) == pow(
            m, owner_keys.private_exponent, owner_keys.modulus
        )

    @pytest.mark.parametrize("mode", list(EwMode))
    def test_deterministic_and_invertible(self, owner_keys, mode):
        c = encrypt_keyword("report", owner_keys, mode)
        assert c == encrypt_keyword("report", owner_keys, mode)
        assert invert_keyword(c, owner_keys, mode) == encode_keyword("report")

    def test_injective_on_sample(self, owner_keys):
        rng = random.Random(5)
        words = {"".join(rng.choice(ALPHABET) for _ in range(rng.randint(1, 64))) for _ in range(300)}
        ciphertexts = {encrypt_keyword(w, owner_keys) for w in words}
        assert len(ciphertexts) == len(words)

    def test_longest_keyword_fits_1024_bit_key(self, owner_keys):
        encrypt_keyword("9" * 64, owner_keys)


class TestDocuments:
    def test_round_trip(self, owner_keys):
        for plaintext in (b"", b"urgent report", bytes(range(256)) * 40):
            c = encrypt_document(plaintext, owner_keys.public())
            assert decrypt_document(c, owner_keys) == plaintext

    @pytest.mark.parametrize("size", [0, 1, 15, 16, 17, 4096, 65537, 1 << 20])
    def test_round_trip_random_documents(self, owner_keys, size):
        plaintext = random.Random(size).randbytes(size)
        c = encrypt_document(plaintext, owner_keys.public())
        assert len(c.payload) == size + 16
        assert decrypt_document(DocumentCiphertext.from_bytes(c.to_bytes()), owner_keys) == plaintext

    def test_randomized(self, owner_keys):
        a = encrypt_document(b"same", owner_keys)
        b = encrypt_document(b"same", owner_keys)
        assert a.payload != b.payload
        assert len(a.nonce) == 12

    def test_serialized_form(self, owner_keys):
        c = encrypt_document(b"weekly report", owner_keys)
        assert DocumentCiphertext.from_bytes(c.to_bytes()) == c
        for bad in (b"", b"GHSEDDC1", b"NOTMAGIC" + c.to_bytes()[8:], c.to_bytes()[:20]):
            with pytest.raises(FormatError):
                DocumentCiphertext.from_bytes(bad)

    def test_every_payload_and_nonce_bit_flip_fails(self, owner_keys):
        c = encrypt_document(b"hi", owner_keys)
        for bit in range(len(c.payload) * 8):
            tampered = c.model_copy(update={"payload": _flip_bit(c.payload, bit)})
            with pytest.raises(AuthenticityError):
                decrypt_document(tampered, owner_keys)
        for bit in range(len(c.nonce) * 8):
            tampered = c.model_copy(update={"nonce": _flip_bit(c.nonce, bit)})
            with pytest.raises(AuthenticityError):
                decrypt_document(tampered, owner_keys)

    def test_wrapped_key_flips_fail(self, owner_keys):
        c = encrypt_document(b"hi", owner_keys)
        for bit in range(0, len(c.wrapped_key) * 8, 7):
            tampered = c.model_copy(update={"wrapped_key": _flip_bit(c.wrapped_key, bit)})
            with pytest.raises(AuthenticityError):
                decrypt_document(tampered, owner_keys)

    def test_wrong_key(self, owner_keys):
        other = keygen(1024)
        with pytest.raises(AuthenticityError):
            decrypt_document(encrypt_document(b"hi", owner_keys), other)


class TestTrapdoors:
    def test_fields(self, owner_keys):
        td = build_trapdoor("urgent", owner_keys)
        assert td.t_ew == encrypt_keyword("urgent", owner_keys)
        assert td.t_ki == ki("urgent") == 288
        assert td.t_index == index_of("urgent")
        assert build_trapdoor("urgent", owner_keys, index_bits=16).t_index == index_of("urgent", 16)

    def test_canonical_bytes(self):
        td = Trapdoor(t_ew=2790, t_ki=14, t_index=0xBA7816BF8F01CFEA)
        assert td.canonical_bytes() == b"GHSED-TD v1\n2790\n14\nba7816bf8f01cfea\n"
        assert Trapdoor.from_canonical(td.canonical_bytes()) == td

    @pytest.mark.parametrize("data", [
        b"GHSED-TD v1\n2790\n14\nba7816bf8f01cfea",
        b"GHSED-TD v1\n02790\n14\nba7816bf8f01cfea\n",
        b"GHSED-TD v1\n2790\n14\nBA7816BF8F01CFEA\n",
        b"GHSED-TD v2\n2790\n14\nba7816bf8f01cfea\n",
        b"GHSED-TD v1\n 2790\n14\nba7816bf8f01cfea\n",
        b"GHSED-TD v1\n2790\n14\n",
    ])
    def test_non_canonical_rejected(self, data):
        with pytest.raises(FormatError):
            Trapdoor.from_canonical(data)

    def test_sign_and_verify(self, owner_keys):
        signed = make_trapdoor("urgent", owner_keys)
        assert signed.algorithm == SIGNATURE_ALGORITHM
        assert verify_trapdoor(signed, owner_keys.public()) == build_trapdoor("urgent", owner_keys)
        decoded = SignedTrapdoor.from_bytes(signed.to_bytes())
        assert verify_trapdoor(decoded, owner_keys.public()) == signed.trapdoor

    def test_every_byte_mutation_rejected(self, owner_keys):
        data = make_trapdoor("urgent", owner_keys).to_bytes()
        for i in range(len(data)):
            mutated = bytearray(data)
            mutated[i] ^= 0xFF
            with pytest.raises((FormatError, AuthorizationError)):
                verify_trapdoor(SignedTrapdoor.from_bytes(bytes(mutated)), owner_keys.public())

    def test_tampered_ki_rejected(self, owner_keys):
        signed = make_trapdoor("urgent", owner_keys)
        forged = signed.model_copy(update={
            "trapdoor": signed.trapdoor.model_copy(update={"t_ki": signed.trapdoor.t_ki + 1}),
        })
        with pytest.raises(AuthorizationError):
            verify_trapdoor(forged, owner_keys.public())

    def test_foreign_signer_rejected(self, owner_keys):
        other = keygen(1024)
        with pytest.raises(AuthorizationError):
            verify_trapdoor(make_trapdoor("urgent", other), owner_keys.public())
        relabelled = make_trapdoor("urgent", other).model_copy(update={"key_id": owner_keys.key_id})
        with pytest.raises(AuthorizationError):
            verify_trapdoor(relabelled, owner_keys.public())

    def test_unknown_algorithm_rejected(self, owner_keys):
        signed = make_trapdoor("urgent", owner_keys).model_copy(update={"algorithm": "rsa-pkcs1-sha1"})
        with pytest.raises(AuthorizationError):
            verify_trapdoor(signed, owner_keys.public())

    def test_trailing_bytes_rejected(self, owner_keys):
        data = make_trapdoor("urgent", owner_keys).to_bytes()
        with pytest.raises(FormatError):
            SignedTrapdoor.from_bytes(data + b"\x00")
        with pytest.raises(FormatError):
            SignedTrapdoor.from_bytes(data[:-1])

    def test_private_mode_trapdoor(self, owner_keys):
        td = build_trapdoor("urgent", owner_keys, EwMode.PRIVATE)
        assert td.t_ew == encrypt_keyword("urgent", owner_keys, EwMode.PRIVATE)
        assert td.t_ew != build_trapdoor("urgent", owner_keys).t_ew
