#!/usr/bin/env python3
"""Print instrumented operation counts and component sizes.

Every group operation is counted by the instrumentation layer while the
seven algorithms run on AND-chain policies of width N, so the table rows
are measurements, not formulas. Revoke and re-decrypt rows run on the
composed (original AND revocation) policy of width 2N. The size table
serializes live keys and ciphertexts; a fresh ciphertext additionally
carries one 48-byte checksum point beyond the payload elements.
"""

from __future__ import annotations

import argparse

from rfab import (
    SeededRandomSource,
    compile_policy,
    count_ops,
    decrypt_or,
    decrypt_re,
    delegate,
    default_env,
    encrypt,
    keygen,
    revoke,
    setup,
)

OPS = ("pairings", "exp_g1", "exp_g2", "exp_gt", "mul_g1", "mul_g2", "mul_gt", "hashes")


def chain(prefix: str, n: int) -> str:
    return " AND ".join(f"{prefix}{i}" for i in range(1, n + 1))


def op_rows(env, n: int):
    rng = SeededRandomSource(7)
    rows = []

    def run(label, fn):
        with count_ops() as ops:
            result = fn()
        rows.append((label, ops.as_dict()))
        return result

    pp, msk = run("setup", lambda: setup(env, rng))
    attrs = {f"Attr{i}" for i in range(1, n + 1)}
    sk = run(f"keygen m={n}", lambda: keygen(pp, msk, attrs, rng))
    policy = compile_policy(chain("Attr", n))
    msg = env.random_gt(rng)
    ct, state = run(f"encrypt n1={n}", lambda: encrypt(pp, policy, msg, rng))
    out = run(f"decrypt_or I={n}", lambda: decrypt_or(pp, sk, ct))
    assert out == msg
    dg, _ = run(f"delegate n1~={n}", lambda: delegate(pp, state, compile_policy(chain("Rev", n)), rng))
    ct_rev = run(f"revoke n1'={2 * n}", lambda: revoke(pp, ct, dg, rng))
    sk_wide = keygen(pp, msk, attrs | {f"Rev{i}" for i in range(1, n + 1)}, rng)
    out = run(f"decrypt_re I'={2 * n}", lambda: decrypt_re(pp, sk_wide, ct.csum, ct_rev))
    assert out == msg
    return rows


def size_rows(env):
    rng = SeededRandomSource(8)
    pp, msk = setup(env, rng)
    rows = []
    for m in (1, 10, 50, 100):
        sk = keygen(pp, msk, {f"K{i}" for i in range(m)}, rng)
        total = (
            len(sk.sk1.to_bytes())
            + sum(len(v.to_bytes()) for v in sk.sk2.values())
            + len(sk.sk3.to_bytes())
        )
        rows.append((f"key m={m}", f"{m + 1} G1 + 1 G2", total))
    for n1, tau in ((1, 1), (10, 1), (10, 3), (100, 1), (100, 3)):
        text = " AND ".join(["X"] * tau + [f"A{i}" for i in range(tau + 1, n1 + 1)])
        policy = compile_policy(text)
        ct, _ = encrypt(pp, policy, env.random_gt(rng), rng)
        total = (
            sum(len(x.to_bytes()) for x in ct.ct3)
            + len(ct.ct1.to_bytes())
            + sum(len(x.to_bytes()) for x in ct.ct2)
            + len(ct.ct4.to_bytes())
            + len(ct.ct5.to_bytes())
            + len(ct.csum.to_bytes())
        )
        shape = f"{n1} G1 + {tau + 1} G2 + 2 GT + csum"
        rows.append((f"ct n1={n1} tau={tau}", shape, total))
    return rows


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="10,50,100", help="chain widths N for the op table")
    args = ap.parse_args()
    env = default_env()

    for n in (int(x) for x in args.sizes.split(",")):
        print(f"\noperation counts, AND-chain N={n}")
        print(f"{'algorithm':<18}" + "".join(f"{c:>9}" for c in OPS))
        for label, ops in op_rows(env, n):
            print(f"{label:<18}" + "".join(f"{ops[c]:>9}" for c in OPS))

    print("\ncomponent sizes (serialized bytes)")
    for label, shape, total in size_rows(env):
        print(f"{label:<18} {shape:<28} {total:>7}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
