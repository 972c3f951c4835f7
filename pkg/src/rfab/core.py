"""Core scheme algorithms: setup, key generation, encryption with an
integrity checksum, and decryption of fresh ciphertexts.

Messages live in GT; kem_wrap/kem_unwrap bridge GT elements to session keys
for byte payloads. Sampled values (keys, randomness) are free under the
operation-count convention; computed group operations are counted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, MutableMapping

from cryptography.hazmat.primitives import hashes as _hashes
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .errors import IntegrityError, NotSatisfiedError
from .groups import (
    G1Elem,
    G2Elem,
    GTElem,
    GroupEnv,
    H1_ID,
    H2C_SUITE,
    RandomSource,
    TAG_ANCHOR,
    TAG_ATTR,
    g1_weighted_product,
    hash_to_g1,
    hash_to_scalar,
    multi_pair,
    pair,
)
from .policy import MspPolicy, solve_coefficients

_KEM_INFO = b"RFAB-KEM-v1"


@dataclass(frozen=True)
class PublicParams:
    env: GroupEnv
    varphi: G1Elem
    phi: G1Elem
    mpk: GTElem
    h2c_suite: str = H2C_SUITE
    h1_id: str = H1_ID


@dataclass(frozen=True)
class MasterSecretKey:
    alpha: int


@dataclass(frozen=True)
class SecretKey:
    attrs: frozenset[str]
    sk1: G1Elem
    sk2: dict[str, G1Elem]
    sk3: G2Elem


@dataclass(frozen=True)
class Ciphertext:
    policy: MspPolicy
    ct1: G2Elem
    ct2: tuple[G2Elem, ...]
    ct3: tuple[G1Elem, ...]
    ct4: GTElem
    ct5: GTElem
    csum: G1Elem
    revocation_depth: int = 0


@dataclass(frozen=True)
class OwnerState:
    """Material the data owner retains to enable later delegation."""

    policy: MspPolicy
    w: tuple[int, ...]
    revocation_depth: int = 0


def anchor_point() -> G1Elem:
    """The distinguished hash point used for share blinding (counted)."""
    return hash_to_g1(TAG_ANCHOR, b"")


def attribute_point(attr: str) -> G1Elem:
    return hash_to_g1(TAG_ATTR, attr.encode())


def setup(
    env: GroupEnv,
    rng: RandomSource,
    *,
    trace: MutableMapping | None = None,
) -> tuple[PublicParams, MasterSecretKey]:
    alpha = env.random_scalar_nonzero(rng)
    varphi = env.random_g1(rng)
    phi = env.random_g1(rng)
    # master-key derivation g1^alpha is sampling-side; the pairing is counted
    mpk = pair(env.g1_base(alpha), env.g2)
    if trace is not None:
        trace["alpha"] = alpha
    return PublicParams(env=env, varphi=varphi, phi=phi, mpk=mpk), MasterSecretKey(alpha)


def keygen(
    pp: PublicParams,
    msk: MasterSecretKey,
    attrs: Iterable[str],
    rng: RandomSource,
    *,
    trace: MutableMapping | None = None,
) -> SecretKey:
    attr_set = frozenset(attrs)
    if not attr_set:
        raise ValueError("key generation needs a nonempty attribute set")
    env = pp.env
    r = env.random_scalar(rng)
    sk1 = (env.g1 ** msk.alpha) * (anchor_point() ** r)
    sk2 = {u: attribute_point(u) ** r for u in sorted(attr_set)}
    sk3 = env.g2 ** r
    if trace is not None:
        trace["r"] = r
    return SecretKey(attrs=attr_set, sk1=sk1, sk2=sk2, sk3=sk3)


def secret_key_consistent(pp: PublicParams, sk: SecretKey) -> bool:
    """Structural check pair(sk1, g2) == mpk * pair(H_anchor, sk3)."""
    return pair(sk.sk1, pp.env.g2) == pp.mpk * pair(anchor_point(), sk.sk3)


def compute_checksum(pp: PublicParams, msg: GTElem, msg_prime: GTElem) -> G1Elem:
    h = hash_to_scalar(msg.to_bytes())
    h_prime = hash_to_scalar(msg_prime.to_bytes())
    return (pp.varphi ** h) * (pp.phi ** h_prime)


def _share_vector(policy: MspPolicy, s1: int, v: list[int], p: int) -> list[int]:
    # share_i = M_i . (s1, v)
    full = [s1] + v
    return [sum(m * x for m, x in zip(row, full)) % p for row in policy.matrix]


def encrypt(
    pp: PublicParams,
    policy: MspPolicy,
    msg: GTElem,
    rng: RandomSource,
    *,
    trace: MutableMapping | None = None,
) -> tuple[Ciphertext, OwnerState]:
    env = pp.env
    n1, n2, tau = policy.n1, policy.n2, policy.tau
    s1 = env.random_scalar(rng)
    v = [env.random_scalar(rng) for _ in range(n2 - 1)]
    w = [env.random_scalar(rng) for _ in range(tau)]
    shares = _share_vector(policy, s1, v, env.p)

    ct1 = env.g2 ** s1
    ct2 = tuple(env.g2 ** w_j for w_j in w)
    anchor = anchor_point()
    ct3 = tuple(
        (anchor ** shares[i]) * (attribute_point(policy.pi[i]) ** w[policy.rho[i] - 1])
        for i in range(n1)
    )
    blind = pp.mpk ** s1
    ct4 = blind * msg
    msg_prime = env.random_gt(rng)
    ct5 = blind * msg_prime  # reuses the same blind, no second GT exponentiation
    csum = compute_checksum(pp, msg, msg_prime)

    if trace is not None:
        trace.update(s1=s1, v=tuple(v), w=tuple(w), msg_prime=msg_prime)
    ct = Ciphertext(policy=policy, ct1=ct1, ct2=ct2, ct3=ct3, ct4=ct4, ct5=ct5, csum=csum)
    return ct, OwnerState(policy=policy, w=tuple(w), revocation_depth=0)


def recover_blinded(pp: PublicParams, sk: SecretKey, ct: Ciphertext) -> tuple[GTElem, GTElem]:
    """Shared decryption stage: unblind ct4/ct5 via the pairing product.

    Works for fresh and revoked ciphertexts alike; callers enforce the
    checksum discipline around it.
    """
    gammas = solve_coefficients(ct.policy, sk.attrs)
    if gammas is None:
        raise NotSatisfiedError("attribute set does not satisfy the policy")

    by_slot: dict[int, list[int]] = {}
    for i in gammas:
        by_slot.setdefault(ct.policy.rho[i], []).append(i)

    pairs: list[tuple[G1Elem, G2Elem]] = [(sk.sk1, ct.ct1)]
    for j in sorted(by_slot):
        agg = g1_weighted_product(
            [(sk.sk2[ct.policy.pi[i]], gammas[i]) for i in by_slot[j]]
        )
        pairs.append((agg, ct.ct2[j - 1]))
    numerator = multi_pair(pairs)

    den = g1_weighted_product([(ct.ct3[i], gammas[i]) for i in sorted(gammas)])
    d = numerator / pair(den, sk.sk3)
    return ct.ct4 / d, ct.ct5 / d


def decrypt_or(pp: PublicParams, sk: SecretKey, ct: Ciphertext) -> GTElem:
    """Decrypt a fresh ciphertext; verifies the checksum before release."""
    if ct.revocation_depth != 0:
        raise ValueError("revoked ciphertext: use decrypt_re with the retained checksum")
    msg, msg_prime = recover_blinded(pp, sk, ct)
    if compute_checksum(pp, msg, msg_prime) != ct.csum:
        raise IntegrityError("checksum mismatch after decryption")
    return msg


def kem_unwrap(msg: GTElem) -> bytes:
    """Derive the session key from a GT message (deterministic)."""
    kdf = HKDF(algorithm=_hashes.SHA256(), length=32, salt=None, info=_KEM_INFO)
    return kdf.derive(msg.to_bytes())


def kem_wrap(pp: PublicParams, rng: RandomSource) -> tuple[bytes, GTElem]:
    """Sample a GT message and derive its session key."""
    msg = pp.env.random_gt(rng)
    return kem_unwrap(msg), msg
