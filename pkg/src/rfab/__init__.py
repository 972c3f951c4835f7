"""Attribute-based encryption with cloud-delegated ciphertext revocation
and tamper-evident checksums, over the BLS12-381 pairing groups."""

from .errors import (
    DecodeError,
    DecodeErrorCode,
    DelegationError,
    IntegrityError,
    NotSatisfiedError,
    PolicyError,
    PolicySyntaxError,
    PreverificationError,
    RfabError,
)
from .groups import (
    CURVE_ID,
    GROUP_ORDER,
    G1Elem,
    G2Elem,
    GroupEnv,
    GTElem,
    OpCounter,
    RandomSource,
    SeededRandomSource,
    SystemRandomSource,
    count_ops,
    default_env,
    hash_to_g1,
    hash_to_scalar,
    multi_pair,
    pair,
)
from .policy import (
    And,
    Leaf,
    MspPolicy,
    Or,
    and_compose,
    compile_msp,
    compile_policy,
    evaluate,
    make_msp,
    parse_policy,
    satisfies,
    solve_coefficients,
    validate_lemma1,
)
from .core import (
    Ciphertext,
    MasterSecretKey,
    OwnerState,
    PublicParams,
    SecretKey,
    compute_checksum,
    decrypt_or,
    encrypt,
    kem_unwrap,
    kem_wrap,
    keygen,
    secret_key_consistent,
    setup,
)
from .revocation import (
    Delegation,
    RevokedCiphertext,
    appendix_identity_check,
    audit_revocation,
    decrypt_re,
    delegate,
    revoke,
)
from . import codec

__version__ = "0.1.0"

__all__ = [
    "And",
    "Ciphertext",
    "CURVE_ID",
    "DecodeError",
    "DecodeErrorCode",
    "Delegation",
    "DelegationError",
    "G1Elem",
    "G2Elem",
    "GROUP_ORDER",
    "GTElem",
    "GroupEnv",
    "IntegrityError",
    "Leaf",
    "MasterSecretKey",
    "MspPolicy",
    "NotSatisfiedError",
    "OpCounter",
    "Or",
    "OwnerState",
    "PolicyError",
    "PolicySyntaxError",
    "PreverificationError",
    "PublicParams",
    "RandomSource",
    "RevokedCiphertext",
    "RfabError",
    "SecretKey",
    "SeededRandomSource",
    "SystemRandomSource",
    "and_compose",
    "appendix_identity_check",
    "audit_revocation",
    "codec",
    "compile_msp",
    "compile_policy",
    "compute_checksum",
    "count_ops",
    "decrypt_or",
    "decrypt_re",
    "default_env",
    "delegate",
    "encrypt",
    "evaluate",
    "hash_to_g1",
    "hash_to_scalar",
    "kem_unwrap",
    "kem_wrap",
    "keygen",
    "make_msp",
    "multi_pair",
    "pair",
    "parse_policy",
    "revoke",
    "satisfies",
    "secret_key_consistent",
    "setup",
    "solve_coefficients",
    "validate_lemma1",
]
