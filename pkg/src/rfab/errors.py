"""Exception hierarchy shared across the package."""

import enum


class RfabError(Exception):
    """Base class for all package errors."""


class PolicyError(RfabError):
    """Invalid policy structure or unsupported composition."""


class PolicySyntaxError(PolicyError):
    """Policy text failed to parse; carries the character position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class NotSatisfiedError(RfabError):
    """The key's attribute set does not satisfy the ciphertext policy."""


class PreverificationError(RfabError):
    """Retained checksum and the revoked ciphertext's checksum disagree."""


class IntegrityError(RfabError):
    """Recomputed checksum does not match the ciphertext checksum."""


class DelegationError(RfabError):
    """Delegation inputs are inconsistent with the owner state or ciphertext."""


class DecodeErrorCode(enum.Enum):
    TRUNCATED = "truncated"
    BAD_MAGIC = "bad-magic"
    BAD_VERSION = "bad-version"
    BAD_KIND = "bad-kind"
    BAD_ENCODING = "bad-encoding"
    NOT_IN_SUBGROUP = "not-in-subgroup"
    LENGTH_MISMATCH = "length-mismatch"
    TRAILING_DATA = "trailing-data"
    BAD_ARMOR = "bad-armor"


class DecodeError(RfabError):
    """Serialized artifact failed to decode; .code says why."""

    def __init__(self, code: DecodeErrorCode, message: str):
        super().__init__(f"{code.value}: {message}")
        self.code = code
