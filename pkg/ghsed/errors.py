"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class GhsedError(Exception):
    exit_code = 1


class DomainError(GhsedError, ValueError):
    """A character or keyword outside the indexing alphabet."""
    exit_code = 2


class ParameterError(GhsedError, ValueError):
    exit_code = 2


class EncodingError(GhsedError, ValueError):
    """Keyword integer encoding does not fit below the modulus."""
    exit_code = 2


class FormatError(GhsedError, ValueError):
    """Malformed heuristic table, trapdoor or ciphertext serialization."""
    exit_code = 4

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class AuthenticityError(GhsedError):
    """Document ciphertext failed authenticated decryption."""
    exit_code = 3


class AuthorizationError(GhsedError):
    """Trapdoor signature did not verify against the owner key."""
    exit_code = 3


class ContractError(GhsedError, RuntimeError):
    exit_code = 5


class StoreError(GhsedError):
    exit_code = 5


class IntegrityError(StoreError):
    """Snapshot checksum, magic or structure is wrong."""


class ProtocolError(GhsedError):
    exit_code = 4


class TransportError(GhsedError):
    exit_code = 4
