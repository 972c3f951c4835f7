"""Ciphertext revocation: owner-side delegation, cloud-side policy
tightening, and three-stage decryption of revoked ciphertexts.

The delegation message carries the slot scalars w' in addition to the dt
group elements: the cloud must raise every row's attribute hash to its slot
scalar, which no combination of the G2-side dt components can provide. The
delegation must therefore stay confidential between owner and cloud; with
dt alone an adversary cannot strip attribute blinding, with w' it could.

Exponent bookkeeping: each revocation round adds one w'-layer to every slot
and every row's attribute term, so after k rounds both carry (k+1) times
their base exponent, and decryption cancels the layers symmetrically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import MutableMapping, Sequence

from .core import (
    Ciphertext,
    OwnerState,
    PublicParams,
    SecretKey,
    anchor_point,
    attribute_point,
    compute_checksum,
    recover_blinded,
    _share_vector,
)
from .errors import DelegationError, IntegrityError, PreverificationError
from .groups import G1Elem, G2Elem, GTElem, RandomSource, multi_pair, pair
from .policy import MspPolicy, and_compose, solve_coefficients


@dataclass(frozen=True)
class Delegation:
    """Owner-produced material enabling the cloud to tighten one policy.

    dt1 maps each new row index (0-based within policy_tilde) to its
    attribute term; dt2 covers every slot of w'; dt3 holds the extra slots
    (tau, tau'] introduced when policy_tilde reuses attributes more than
    the current state does.
    """

    policy_tilde: MspPolicy
    dt1: dict[int, G1Elem]
    dt2: tuple[G2Elem, ...]
    dt3: dict[int, G2Elem]
    w_prime: tuple[int, ...]


@dataclass(frozen=True)
class RevokedCiphertext(Ciphertext):
    pass


def delegate(
    pp: PublicParams,
    state: OwnerState,
    policy_tilde: MspPolicy,
    rng: RandomSource,
    *,
    trace: MutableMapping | None = None,
) -> tuple[Delegation, OwnerState]:
    env = pp.env
    tau = len(state.w)
    if state.revocation_depth == 0 and tau != state.policy.tau:
        raise DelegationError("owner state w length does not match its policy's tau")
    if tau < state.policy.tau:
        raise DelegationError("owner state w is shorter than the policy needs")

    composed = and_compose(state.policy, policy_tilde)
    n1 = state.policy.n1
    tau_tilde = policy_tilde.tau
    if tau_tilde <= tau:
        w_prime = state.w
        w_tilde: tuple[int, ...] = ()
        tau_prime = tau
    else:
        w_tilde = tuple(env.random_scalar(rng) for _ in range(tau_tilde))
        w_prime = state.w + w_tilde
        tau_prime = tau + tau_tilde

    dt2 = tuple(env.g2 ** w_prime[j] for j in range(tau_prime))
    # extra slots reuse the already-computed dt2 entries
    dt3 = {j: dt2[j - 1] for j in range(tau + 1, tau_prime + 1)}
    dt1 = {
        k: attribute_point(composed.pi[n1 + k]) ** w_prime[composed.rho[n1 + k] - 1]
        for k in range(policy_tilde.n1)
    }

    if trace is not None:
        trace.update(w_tilde=w_tilde, w_prime=w_prime)
    dg = Delegation(policy_tilde=policy_tilde, dt1=dt1, dt2=dt2, dt3=dt3, w_prime=w_prime)
    new_state = OwnerState(
        policy=composed, w=w_prime, revocation_depth=state.revocation_depth + 1
    )
    return dg, new_state


def revoke(
    pp: PublicParams,
    ct: Ciphertext,
    dg: Delegation,
    rng: RandomSource,
    *,
    trace: MutableMapping | None = None,
) -> RevokedCiphertext:
    env = pp.env
    if len(ct.ct2) != len(dg.dt2) - len(dg.dt3):
        raise DelegationError("delegation slot count does not match the ciphertext")
    composed = and_compose(ct.policy, dg.policy_tilde)

    depth = ct.revocation_depth
    n1 = ct.policy.n1
    s1_prime = env.random_scalar(rng)
    v_prime = [env.random_scalar(rng) for _ in range(composed.n2 - 1)]
    shares = _share_vector(composed, s1_prime, v_prime, env.p)

    ct1 = ct.ct1 * (env.g2 ** s1_prime)
    ct2 = []
    for j in range(1, len(dg.dt2) + 1):
        base = ct.ct2[j - 1] if j <= len(ct.ct2) else dg.dt3[j] ** (depth + 1)
        ct2.append(base * dg.dt2[j - 1])

    anchor = anchor_point()
    ct3 = []
    for i in range(composed.n1):
        attr_term = attribute_point(composed.pi[i]) ** dg.w_prime[composed.rho[i] - 1]
        base = ct.ct3[i] if i < n1 else dg.dt1[i - n1] ** (depth + 1)
        ct3.append(base * (anchor ** shares[i]) * attr_term)

    blind = pp.mpk ** s1_prime
    ct4 = ct.ct4 * blind
    ct5 = ct.ct5 * blind

    if trace is not None:
        trace.update(s1_prime=s1_prime, v_prime=tuple(v_prime))
    return RevokedCiphertext(
        policy=composed,
        ct1=ct1,
        ct2=tuple(ct2),
        ct3=tuple(ct3),
        ct4=ct4,
        ct5=ct5,
        csum=ct.csum,
        revocation_depth=depth + 1,
    )


def decrypt_re(
    pp: PublicParams,
    sk: SecretKey,
    csum_orig: G1Elem,
    ct_rev: Ciphertext,
) -> GTElem:
    """Three stages: checksum preverification, decryption, verification."""
    if ct_rev.revocation_depth < 1:
        raise ValueError("fresh ciphertext: use decrypt_or")
    # stage 1: compare before any pairing work
    if csum_orig != ct_rev.csum:
        raise PreverificationError("retained checksum does not match the ciphertext")
    # stage 2
    msg, msg_prime = recover_blinded(pp, sk, ct_rev)
    # stage 3
    if compute_checksum(pp, msg, msg_prime) != ct_rev.csum:
        raise IntegrityError("checksum mismatch after decryption")
    return msg


def audit_revocation(receipt: OwnerState, ct: Ciphertext) -> bool:
    """Check a ciphertext against the owner's post-delegation state.

    A cloud that skipped the revocation (or applied a different policy)
    leaves the embedded policy or depth inconsistent with the receipt.
    """
    return ct.policy == receipt.policy and ct.revocation_depth == receipt.revocation_depth


def appendix_identity_check(
    pp: PublicParams,
    sk: SecretKey,
    ct_rev: Ciphertext,
    *,
    alpha: int,
    r: int,
    s1: int,
    s1_primes: int | Sequence[int],
    w_prime: Sequence[int],
    gammas: dict[int, int] | None = None,
) -> bool:
    """Test-only oracle: verify the three closed-form pairing identities
    behind revoked-ciphertext decryption, given captured trapdoors.

    Checks, with F the pairing of the gamma-weighted attribute hashes
    against sk3 and k the revocation depth:
      (a) pair(sk1, ct1) == mpk^S * pair(anchor, sk3)^S for S = s1 + sum s1',
      (b) the slot pairing product == F^(k+1),
      (c) the row pairing == pair(anchor, sk3)^S * F^(k+1),
    and that (a)*(b)/(c) == mpk^S.
    """
    env = pp.env
    if isinstance(s1_primes, int):
        s1_primes = [s1_primes]
    total = (s1 + sum(s1_primes)) % env.p

    if pp.mpk != env.gt_base(alpha):
        return False
    if sk.sk3 != env.g2_base(r):
        return False

    if gammas is None:
        gammas = solve_coefficients(ct_rev.policy, sk.attrs)
    if gammas is None:
        return False

    policy = ct_rev.policy
    mult = ct_rev.revocation_depth + 1
    anchor_sk3 = pair(anchor_point(), sk.sk3)

    agg = None
    for i in sorted(gammas):
        exp = (gammas[i] * w_prime[policy.rho[i] - 1]) % env.p
        factor = attribute_point(policy.pi[i]) ** exp
        agg = factor if agg is None else agg * factor
    f_term = pair(agg, sk.sk3)

    lhs_a = pair(sk.sk1, ct_rev.ct1)
    if lhs_a != (pp.mpk ** total) * (anchor_sk3 ** total):
        return False

    by_slot: dict[int, list[int]] = {}
    for i in gammas:
        by_slot.setdefault(policy.rho[i], []).append(i)
    slot_pairs = []
    for j in sorted(by_slot):
        slot_agg = None
        for i in by_slot[j]:
            factor = sk.sk2[policy.pi[i]] ** gammas[i]
            slot_agg = factor if slot_agg is None else slot_agg * factor
        slot_pairs.append((slot_agg, ct_rev.ct2[j - 1]))
    lhs_b = multi_pair(slot_pairs)
    if lhs_b != f_term ** mult:
        return False

    row_agg = None
    for i in sorted(gammas):
        factor = ct_rev.ct3[i] ** gammas[i]
        row_agg = factor if row_agg is None else row_agg * factor
    lhs_c = pair(row_agg, sk.sk3)
    if lhs_c != (anchor_sk3 ** total) * (f_term ** mult):
        return False

    return lhs_a * lhs_b / lhs_c == pp.mpk ** total
