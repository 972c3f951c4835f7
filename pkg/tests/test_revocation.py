"""Delegation, cloud-side revocation, revoked-ciphertext decryption.

Structural assertions recompute delegation and re-encryption components
from traced randomness; the layered-exponent law on reuse slots is checked
against a closed form maintained here (after the k-th revocation every
slot carries (k+1) times the final slot scalar).
"""

from __future__ import annotations

import dataclasses

import pytest

from rfab import (
    GROUP_ORDER,
    Delegation,
    DelegationError,
    IntegrityError,
    NotSatisfiedError,
    OwnerState,
    PolicyError,
    PreverificationError,
    SeededRandomSource,
    and_compose,
    appendix_identity_check,
    audit_revocation,
    compile_policy,
    count_ops,
    decrypt_or,
    decrypt_re,
    delegate,
    encrypt,
    keygen,
    revoke,
    setup,
)
from rfab.core import anchor_point, attribute_point

P = GROUP_ORDER


@pytest.fixture()
def fresh(env, authority):
    """Fresh tau=1 ciphertext on A AND B plus its owner state."""
    pp, msk = authority
    rng = SeededRandomSource(40)
    msg = env.random_gt(rng)
    ct, state = encrypt(pp, compile_policy("A AND B"), msg, rng)
    return pp, msk, msg, ct, state, rng


class TestDelegate:
    def test_no_new_slots_branch(self, env, fresh):
        pp, msk, msg, ct, state, rng = fresh
        policy_tilde = compile_policy("X")
        trace = {}
        dg, new_state = delegate(pp, state, policy_tilde, rng, trace=trace)

        assert dg.policy_tilde == policy_tilde
        assert dg.dt3 == {}
        assert dg.w_prime == state.w
        assert trace["w_tilde"] == ()
        assert len(dg.dt2) == 1
        assert set(dg.dt1) == {0}

        composed = and_compose(state.policy, policy_tilde)
        assert new_state.policy == composed
        assert new_state.w == dg.w_prime
        assert new_state.revocation_depth == 1

    def test_extra_slots_branch(self, env, fresh):
        # policy_tilde reuses X twice while the state only has one slot
        pp, msk, msg, ct, state, rng = fresh
        policy_tilde = compile_policy("X AND (Y OR X)")
        assert policy_tilde.tau == 2
        trace = {}
        dg, new_state = delegate(pp, state, policy_tilde, rng, trace=trace)

        assert len(dg.dt2) == 3
        assert sorted(dg.dt3) == [2, 3]
        assert dg.w_prime[: len(state.w)] == state.w
        assert len(trace["w_tilde"]) == 2
        assert dg.w_prime == state.w + trace["w_tilde"]
        assert len(dg.dt1) == policy_tilde.n1 == 3
        assert new_state.w == dg.w_prime
        # extra dt3 entries are copies of the matching dt2 slots
        for j, elem in dg.dt3.items():
            assert elem == dg.dt2[j - 1]

    def test_components_match_traced_scalars(self, env, fresh):
        pp, msk, msg, ct, state, rng = fresh
        policy_tilde = compile_policy("X AND (Y OR X)")
        dg, _ = delegate(pp, state, policy_tilde, rng)

        for j, elem in enumerate(dg.dt2):
            assert elem == env.g2_base(dg.w_prime[j])
        composed = and_compose(state.policy, policy_tilde)
        n1 = state.policy.n1
        for k, elem in dg.dt1.items():
            attr = composed.pi[n1 + k]
            slot = composed.rho[n1 + k]
            assert elem == attribute_point(attr) ** dg.w_prime[slot - 1]

    def test_rejects_inconsistent_fresh_state(self, fresh):
        pp, msk, msg, ct, state, rng = fresh
        bad = OwnerState(policy=state.policy, w=state.w + (5,), revocation_depth=0)
        with pytest.raises(DelegationError):
            delegate(pp, bad, compile_policy("X"), rng)

    def test_rejects_short_w(self, fresh):
        pp, msk, msg, ct, state, rng = fresh
        wide = compile_policy("A AND (B OR A)")  # tau 2
        bad = OwnerState(policy=wide, w=(7,), revocation_depth=1)
        with pytest.raises(DelegationError):
            delegate(pp, bad, compile_policy("X"), rng)

    def test_rejects_overlapping_attributes(self, fresh):
        pp, msk, msg, ct, state, rng = fresh
        with pytest.raises(PolicyError):
            delegate(pp, state, compile_policy("B OR X"), rng)


class TestRevoke:
    def test_shape_and_linkage(self, env, fresh):
        pp, msk, msg, ct, state, rng = fresh
        policy_tilde = compile_policy("X OR Y")
        dg, new_state = delegate(pp, state, policy_tilde, rng)
        ct_rev = revoke(pp, ct, dg, rng)

        composed = and_compose(ct.policy, policy_tilde)
        assert ct_rev.revocation_depth == 1
        assert ct_rev.policy == composed
        assert len(ct_rev.ct3) == ct.policy.n1 + policy_tilde.n1
        assert len(ct_rev.ct2) == len(dg.dt2)
        assert ct_rev.csum == ct.csum
        assert ct_rev.csum is ct.csum
        assert audit_revocation(new_state, ct_rev)

    def test_components_match_traced_randomness(self, env, fresh):
        pp, msk, msg, ct, state, rng = fresh
        dg, _ = delegate(pp, state, compile_policy("X"), rng)
        trace = {}
        ct_rev = revoke(pp, ct, dg, rng, trace=trace)
        s1p, vp = trace["s1_prime"], trace["v_prime"]

        assert ct_rev.ct1 == ct.ct1 * env.g2_base(s1p)
        blind = pp.mpk ** s1p
        assert ct_rev.ct4 == ct.ct4 * blind
        assert ct_rev.ct5 == ct.ct5 * blind

        composed = ct_rev.policy
        full = (s1p,) + vp
        anchor = anchor_point()
        for i, row in enumerate(composed.matrix):
            share = sum(m * x for m, x in zip(row, full)) % P
            attr_term = attribute_point(composed.pi[i]) ** dg.w_prime[composed.rho[i] - 1]
            base = ct.ct3[i] if i < ct.policy.n1 else dg.dt1[i - ct.policy.n1]
            assert ct_rev.ct3[i] == base * (anchor ** share) * attr_term

    def test_rejects_mismatched_delegation(self, env, authority):
        pp, msk = authority
        rng = SeededRandomSource(41)
        # delegation prepared for a two-slot state, ciphertext has one slot
        ct_wide, state_wide = encrypt(
            pp, compile_policy("A AND (B OR A)"), env.random_gt(rng), rng
        )
        dg_wide, _ = delegate(pp, state_wide, compile_policy("X"), rng)
        ct_narrow, _ = encrypt(pp, compile_policy("A AND B"), env.random_gt(rng), rng)
        with pytest.raises(DelegationError):
            revoke(pp, ct_narrow, dg_wide, rng)

    def test_roundtrip_after_revocation(self, env, fresh):
        pp, msk, msg, ct, state, rng = fresh
        dg, _ = delegate(pp, state, compile_policy("X"), rng)
        ct_rev = revoke(pp, ct, dg, rng)
        sk = keygen(pp, msk, {"A", "B", "X"}, rng)
        assert decrypt_re(pp, sk, ct.csum, ct_rev) == msg

    def test_revoked_keys_locked_out(self, env, fresh):
        # pre-revocation attribute set alone no longer satisfies
        pp, msk, msg, ct, state, rng = fresh
        dg, _ = delegate(pp, state, compile_policy("X"), rng)
        ct_rev = revoke(pp, ct, dg, rng)
        sk_old = keygen(pp, msk, {"A", "B"}, rng)
        assert decrypt_or(pp, sk_old, ct) == msg
        with pytest.raises(NotSatisfiedError):
            decrypt_re(pp, sk_old, ct.csum, ct_rev)


class TestDecryptReStages:
    @pytest.fixture()
    def revoked(self, env, fresh):
        pp, msk, msg, ct, state, rng = fresh
        dg, _ = delegate(pp, state, compile_policy("X"), rng)
        ct_rev = revoke(pp, ct, dg, rng)
        sk = keygen(pp, msk, {"A", "B", "X"}, rng)
        return pp, sk, msg, ct, ct_rev, rng

    def test_preverification_runs_before_any_pairing(self, env, revoked):
        pp, sk, msg, ct, ct_rev, rng = revoked
        wrong = env.random_g1(rng)
        assert wrong != ct.csum
        with count_ops() as ops:
            with pytest.raises(PreverificationError):
                decrypt_re(pp, sk, wrong, ct_rev)
        assert ops.pairings == 0

    def test_fresh_ciphertext_rejected(self, revoked):
        pp, sk, msg, ct, ct_rev, rng = revoked
        with pytest.raises(ValueError):
            decrypt_re(pp, sk, ct.csum, ct)

    def test_tampered_payload_detected(self, env, revoked):
        pp, sk, msg, ct, ct_rev, rng = revoked
        tampered = dataclasses.replace(ct_rev, ct4=env.random_gt(rng))
        with pytest.raises(IntegrityError):
            decrypt_re(pp, sk, ct.csum, tampered)

    def test_tampered_row_detected(self, env, revoked):
        pp, sk, msg, ct, ct_rev, rng = revoked
        rows = (env.random_g1(rng),) + ct_rev.ct3[1:]
        tampered = dataclasses.replace(ct_rev, ct3=rows)
        with pytest.raises(IntegrityError):
            decrypt_re(pp, sk, ct.csum, tampered)


class TestChaining:
    def test_three_rounds_with_slot_law(self, env, authority):
        pp, msk = authority
        rng = SeededRandomSource(42)
        msg = env.random_gt(rng)
        ct, state = encrypt(pp, compile_policy("A AND B"), msg, rng)
        grants = [
            ({"A", "B", "X", "Y"}, compile_policy("X AND (Y OR X)")),
            ({"A", "B", "X", "Y", "Q"}, compile_policy("Q")),
            ({"A", "B", "X", "Y", "Q", "R"}, compile_policy("R")),
        ]
        for depth, (attrs, policy_tilde) in enumerate(grants, start=1):
            dg, state = delegate(pp, state, policy_tilde, rng)
            ct = revoke(pp, ct, dg, rng)
            assert ct.revocation_depth == depth
            # every slot now layers (depth+1) copies of the final scalar
            assert len(ct.ct2) == len(state.w)
            for j, w_j in enumerate(state.w):
                assert ct.ct2[j] == env.g2_base((depth + 1) * w_j % P)
            sk = keygen(pp, msk, attrs, rng)
            assert decrypt_re(pp, sk, ct.csum, ct) == msg

    def test_intermediate_keys_lose_access(self, env, authority):
        pp, msk = authority
        rng = SeededRandomSource(43)
        msg = env.random_gt(rng)
        ct, state = encrypt(pp, compile_policy("A"), msg, rng)
        dg1, state = delegate(pp, state, compile_policy("X"), rng)
        ct1 = revoke(pp, ct, dg1, rng)
        dg2, state = delegate(pp, state, compile_policy("Y"), rng)
        ct2 = revoke(pp, ct1, dg2, rng)

        sk_depth1 = keygen(pp, msk, {"A", "X"}, rng)
        assert decrypt_re(pp, sk_depth1, ct.csum, ct1) == msg
        with pytest.raises(NotSatisfiedError):
            decrypt_re(pp, sk_depth1, ct.csum, ct2)
        sk_depth2 = keygen(pp, msk, {"A", "X", "Y"}, rng)
        assert decrypt_re(pp, sk_depth2, ct.csum, ct2) == msg


class TestAudit:
    def test_detects_lazy_cloud(self, env, fresh):
        pp, msk, msg, ct, state, rng = fresh
        dg, receipt = delegate(pp, state, compile_policy("X"), rng)
        ct_rev = revoke(pp, ct, dg, rng)
        assert audit_revocation(receipt, ct_rev)
        # cloud returned the original ciphertext untouched
        assert not audit_revocation(receipt, ct)

    def test_detects_stale_receipt(self, env, fresh):
        pp, msk, msg, ct, state, rng = fresh
        dg, receipt = delegate(pp, state, compile_policy("X"), rng)
        ct_rev = revoke(pp, ct, dg, rng)
        assert not audit_revocation(state, ct_rev)

    def test_detects_wrong_policy(self, env, fresh):
        pp, msk, msg, ct, state, rng = fresh
        dg_x, receipt_x = delegate(pp, state, compile_policy("X"), rng)
        dg_y, _ = delegate(pp, state, compile_policy("Y"), rng)
        ct_rev_y = revoke(pp, ct, dg_y, rng)
        assert not audit_revocation(receipt_x, ct_rev_y)


class TestIdentityOracle:
    def _build(self, env, depth_count):
        rng = SeededRandomSource(44)
        setup_trace, key_trace, enc_trace = {}, {}, {}
        pp, msk = setup(env, rng, trace=setup_trace)
        attrs = {"A", "B"} | {f"X{d}" for d in range(depth_count)}
        sk = keygen(pp, msk, attrs, rng, trace=key_trace)
        ct, state = encrypt(
            pp, compile_policy("A AND B"), env.random_gt(rng), rng, trace=enc_trace
        )
        s1_primes = []
        dg_trace = {}
        for d in range(depth_count):
            dg_trace = {}
            dg, state = delegate(pp, state, compile_policy(f"X{d}"), rng, trace=dg_trace)
            rev_trace = {}
            ct = revoke(pp, ct, dg, rng, trace=rev_trace)
            s1_primes.append(rev_trace["s1_prime"])
        return pp, sk, ct, dict(
            alpha=setup_trace["alpha"],
            r=key_trace["r"],
            s1=enc_trace["s1"],
            s1_primes=s1_primes,
            w_prime=dg_trace["w_prime"],
        )

    def test_identities_hold_at_depth_one(self, env):
        pp, sk, ct, secrets = self._build(env, 1)
        assert appendix_identity_check(pp, sk, ct, **secrets)

    def test_identities_hold_at_depth_two(self, env):
        pp, sk, ct, secrets = self._build(env, 2)
        assert appendix_identity_check(pp, sk, ct, **secrets)

    def test_corrupted_ciphertext_fails(self, env):
        pp, sk, ct, secrets = self._build(env, 1)
        bad = dataclasses.replace(ct, ct1=ct.ct1 * pp.env.g2)
        assert not appendix_identity_check(pp, sk, bad, **secrets)

    def test_wrong_master_secret_fails(self, env):
        pp, sk, ct, secrets = self._build(env, 1)
        secrets["alpha"] = (secrets["alpha"] + 1) % P
        assert not appendix_identity_check(pp, sk, ct, **secrets)

    def test_unsatisfying_key_fails(self, env, authority):
        pp_a, msk_a = authority
        pp, sk, ct, secrets = self._build(env, 1)
        rng = SeededRandomSource(45)
        # key lacks the post-revocation attribute entirely
        narrow = keygen(pp, type(msk_a)(alpha=secrets["alpha"]), {"A", "B"}, rng)
        assert not appendix_identity_check(pp, narrow, ct, **secrets)


class TestOperationCounts:
    def test_delegate_no_new_slots(self, env, authority):
        pp, _ = authority
        rng = SeededRandomSource(46)
        _, state = encrypt(pp, compile_policy("A AND B"), env.random_gt(rng), rng)
        policy_tilde = compile_policy("X AND Y AND Z")
        with count_ops() as ops:
            delegate(pp, state, policy_tilde, rng)
        assert ops.as_dict() == {
            "pairings": 0,
            "exp_g1": 3,
            "exp_g2": 1,
            "exp_gt": 0,
            "mul_g1": 0,
            "mul_g2": 0,
            "mul_gt": 0,
            "hashes": 3,
        }

    def test_delegate_extra_slots(self, env, authority):
        pp, _ = authority
        rng = SeededRandomSource(47)
        _, state = encrypt(pp, compile_policy("A AND B"), env.random_gt(rng), rng)
        policy_tilde = compile_policy("X AND (Y OR X)")
        with count_ops() as ops:
            delegate(pp, state, policy_tilde, rng)
        # tau' = 1 + 2 new slots
        assert ops.exp_g2 == 3
        assert ops.exp_g1 == 3
        assert ops.hashes == 3
        assert ops.mul_g1 == ops.mul_g2 == ops.pairings == 0

    def test_revoke_depth_zero(self, env, authority):
        pp, _ = authority
        rng = SeededRandomSource(48)
        ct, state = encrypt(
            pp, compile_policy("A1 AND A2 AND A3 AND A4"), env.random_gt(rng), rng
        )
        dg, _ = delegate(pp, state, compile_policy("R1 AND R2 AND R3 AND R4"), rng)
        n1p, taup = 8, 1
        with count_ops() as ops:
            revoke(pp, ct, dg, rng)
        assert ops.as_dict() == {
            "pairings": 0,
            "exp_g1": 2 * n1p,
            "exp_g2": 1,
            "exp_gt": 1,
            "mul_g1": 2 * n1p,
            "mul_g2": taup + 1,
            "mul_gt": 2,
            "hashes": n1p + 1,
        }

    def test_decrypt_re_composed_chain(self, env, authority):
        pp, msk = authority
        rng = SeededRandomSource(49)
        ct, state = encrypt(
            pp, compile_policy("A1 AND A2 AND A3 AND A4"), env.random_gt(rng), rng
        )
        dg, _ = delegate(pp, state, compile_policy("R1 AND R2 AND R3 AND R4"), rng)
        ct_rev = revoke(pp, ct, dg, rng)
        sk = keygen(pp, msk, [f"A{i}" for i in range(1, 5)] + [f"R{i}" for i in range(1, 5)], rng)
        with count_ops() as ops:
            decrypt_re(pp, sk, ct.csum, ct_rev)
        rows = 8
        assert ops.as_dict() == {
            "pairings": 3,
            "exp_g1": 2,
            "exp_g2": 0,
            "exp_gt": 0,
            "mul_g1": 2 * rows - 1,
            "mul_g2": 0,
            "mul_gt": 4,
            "hashes": 2,
        }
