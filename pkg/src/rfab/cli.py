"""Role-oriented command line: authority setup/keygen, owner encrypt and
delegate, cloud revoke, user decrypt, plus policy tooling and the bench.

Exit codes: 0 success, 2 usage or malformed request, 3 attributes do not
satisfy the policy, 4 checksum preverification failed, 5 integrity failure
(embedded checksum or payload tag), 6 file decode or I/O failure.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305

from . import codec
from .codec import Kind
from .core import (
    decrypt_or,
    encrypt,
    kem_unwrap,
    kem_wrap,
    keygen,
    setup,
)
from .errors import (
    DecodeError,
    DecodeErrorCode,
    DelegationError,
    IntegrityError,
    NotSatisfiedError,
    PolicyError,
    PolicySyntaxError,
    PreverificationError,
)
from .groups import (
    CURVE_ID,
    G1Elem,
    RandomSource,
    SeededRandomSource,
    SystemRandomSource,
    default_env,
)
from .policy import compile_policy
from .revocation import decrypt_re, delegate, revoke

CSUM_LABEL = "RFAB-CSUM"
DEM_MAGIC = b"RFABDEM1"
DEM_ID = "chacha20poly1305"


class _UsageError(Exception):
    pass


def _rng(args: argparse.Namespace) -> RandomSource:
    seed = getattr(args, "seed", None)
    if seed is not None:
        if not getattr(args, "insecure_deterministic", False):
            raise _UsageError("--seed requires --insecure-deterministic")
        return SeededRandomSource(seed)
    return SystemRandomSource()


def _read_text(path: str, role: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise OSError(f"{role} file {path}: {exc.strerror or exc}") from None


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text)
    print(f"wrote {path}")


def _write_bytes(path: str, data: bytes) -> None:
    Path(path).write_bytes(data)
    print(f"wrote {path}")


def _load(path: str, role: str, kinds: tuple[Kind, ...]):
    raw = codec.parse_text_envelope(_read_text(path, role))
    artifact = codec.decode(raw)
    kind = codec.kind_of(artifact)
    if kind not in kinds:
        wanted = " or ".join(k.name for k in kinds)
        raise DecodeError(
            DecodeErrorCode.BAD_KIND,
            f"{role} file {path} holds a {kind.name} envelope, expected {wanted}",
        )
    return artifact


def _store(path: str, artifact) -> None:
    _write_text(path, codec.text_envelope(codec.encode(artifact)))


def _write_csum(path: str, csum: G1Elem) -> None:
    _write_text(path, codec.text_envelope(csum.to_bytes(), label=CSUM_LABEL))


def _load_csum(path: str) -> G1Elem:
    raw = codec.parse_text_envelope(
        _read_text(path, "checksum"), expected_label=CSUM_LABEL
    )
    try:
        return G1Elem.from_bytes(raw)
    except ValueError as exc:
        raise DecodeError(
            DecodeErrorCode.BAD_ENCODING, f"checksum file {path}: {exc}"
        ) from None


def _split_attrs(text: str) -> list[str]:
    attrs = [a for a in re.split(r"[,\s]+", text.strip()) if a]
    if not attrs:
        raise _UsageError("no attributes given")
    return attrs


def _dem_encrypt(key: bytes, plaintext: bytes, rng: RandomSource) -> bytes:
    nonce = rng.randbelow(1 << 96).to_bytes(12, "big")
    header = bytearray(DEM_MAGIC)
    dem_id = DEM_ID.encode("ascii")
    header += len(dem_id).to_bytes(4, "big")
    header += dem_id
    header += len(nonce).to_bytes(4, "big")
    header += nonce
    sealed = ChaCha20Poly1305(key).encrypt(nonce, plaintext, bytes(header))
    return bytes(header) + sealed


def _dem_decrypt(key: bytes, blob: bytes) -> bytes:
    r = codec._Reader(blob)
    magic = r.take(len(DEM_MAGIC), "payload magic")
    if magic != DEM_MAGIC:
        raise DecodeError(DecodeErrorCode.BAD_MAGIC, "payload magic is not RFABDEM1")
    dem_id = r.string("payload cipher id")
    if dem_id != DEM_ID:
        raise DecodeError(
            DecodeErrorCode.BAD_ENCODING, f"unsupported payload cipher {dem_id!r}"
        )
    nonce = r.take(r.u32("payload nonce"), "payload nonce")
    if len(nonce) != 12:
        raise DecodeError(DecodeErrorCode.BAD_ENCODING, "payload nonce must be 12 bytes")
    header = blob[: r.pos]
    return ChaCha20Poly1305(key).decrypt(nonce, blob[r.pos :], header)


def _cmd_ac_setup(args: argparse.Namespace) -> int:
    rng = _rng(args)
    pp, msk = setup(default_env(), rng)
    _store(args.out, pp)
    _store(args.msk, msk)
    return 0


def _cmd_ac_keygen(args: argparse.Namespace) -> int:
    pp = _load(args.pp, "parameters", (Kind.PP,))
    msk = _load(args.msk, "master-secret", (Kind.MSK,))
    sk = keygen(pp, msk, _split_attrs(args.attrs), _rng(args))
    _store(args.out, sk)
    return 0


def _cmd_do_encrypt(args: argparse.Namespace) -> int:
    pp = _load(args.pp, "parameters", (Kind.PP,))
    policy = compile_policy(args.policy)
    rng = _rng(args)
    session_key, msg = kem_wrap(pp, rng)
    ct, state = encrypt(pp, policy, msg, rng)
    _store(args.out, ct)
    _store(args.state_out or args.out + ".state", state)
    _write_csum(args.csum_out or args.out + ".csum", ct.csum)
    if args.payload_in:
        plaintext = Path(args.payload_in).read_bytes()
        blob = _dem_encrypt(session_key, plaintext, rng)
        _write_bytes(args.payload_out or args.out + ".payload", blob)
    if args.key_out:
        _write_text(args.key_out, session_key.hex() + "\n")
    return 0


def _cmd_do_delegate(args: argparse.Namespace) -> int:
    pp = _load(args.pp, "parameters", (Kind.PP,))
    state = _load(args.state, "owner-state", (Kind.STATE,))
    policy_tilde = compile_policy(args.policy)
    dg, new_state = delegate(pp, state, policy_tilde, _rng(args))
    _store(args.out, dg)
    _store(args.state_out or args.out + ".state", new_state)
    return 0


def _cmd_cs_revoke(args: argparse.Namespace) -> int:
    pp = _load(args.pp, "parameters", (Kind.PP,))
    ct = _load(args.ct, "ciphertext", (Kind.CT, Kind.CTREV))
    dg = _load(args.dg, "delegation", (Kind.DG,))
    ct_rev = revoke(pp, ct, dg, _rng(args))
    _store(args.out, ct_rev)
    return 0


def _finish_decrypt(args: argparse.Namespace, msg) -> None:
    if args.payload:
        session_key = kem_unwrap(msg)
        blob = Path(args.payload).read_bytes()
        plaintext = _dem_decrypt(session_key, blob)
        _write_bytes(args.payload_out or args.payload + ".plain", plaintext)
    if args.key_out:
        _write_text(args.key_out, kem_unwrap(msg).hex() + "\n")


def _cmd_du_decrypt(args: argparse.Namespace) -> int:
    pp = _load(args.pp, "parameters", (Kind.PP,))
    sk = _load(args.sk, "secret-key", (Kind.SK,))
    ct = _load(args.ct, "ciphertext", (Kind.CT, Kind.CTREV))
    if ct.revocation_depth != 0:
        raise _UsageError("ciphertext is revoked; use du-decrypt-revoked")
    msg = decrypt_or(pp, sk, ct)
    _write_csum(args.csum_out or args.ct + ".csum", ct.csum)
    _finish_decrypt(args, msg)
    print("decrypt ok")
    return 0


def _cmd_du_decrypt_revoked(args: argparse.Namespace) -> int:
    pp = _load(args.pp, "parameters", (Kind.PP,))
    sk = _load(args.sk, "secret-key", (Kind.SK,))
    ct = _load(args.ct, "ciphertext", (Kind.CT, Kind.CTREV))
    if ct.revocation_depth == 0:
        raise _UsageError("ciphertext is not revoked; use du-decrypt")
    csum_orig = _load_csum(args.csum)
    msg = decrypt_re(pp, sk, csum_orig, ct)
    _finish_decrypt(args, msg)
    print("decrypt ok")
    return 0


def _cmd_policy_check(args: argparse.Namespace) -> int:
    text = args.policy_text if args.policy_text is not None else args.policy
    if text is None:
        raise _UsageError("give a policy (positional or --policy)")
    policy = compile_policy(text)
    print(f"n1={policy.n1} n2={policy.n2} tau={policy.tau}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    from . import bench

    grid = tuple(int(n) for n in args.grid.split(","))
    records = bench.run_suite(
        grid=grid, repetitions=args.reps, seed=args.seed or 0, csv_path=args.csv
    )
    print(f"wrote {args.csv} ({len(records)} records)")
    if args.plots_dir:
        for path in bench.emit_plots(records, args.plots_dir):
            print(f"wrote {path}")
    return 0


def _add_rng_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="deterministic RNG seed (test mode)")
    p.add_argument(
        "--insecure-deterministic",
        action="store_true",
        help="required to honor --seed; output is NOT secure",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfab",
        description="attribute-based encryption with cloud-delegated revocation",
    )
    parser.add_argument(
        "--curve", choices=[CURVE_ID], default=CURVE_ID, help="pairing curve"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ac-setup", help="authority: generate public parameters")
    p.add_argument("--out", required=True, help="public-parameters output file")
    p.add_argument("--msk", required=True, help="master-secret output file")
    _add_rng_flags(p)
    p.set_defaults(func=_cmd_ac_setup)

    p = sub.add_parser("ac-keygen", help="authority: issue an attribute key")
    p.add_argument("--pp", required=True)
    p.add_argument("--msk", required=True)
    p.add_argument("--attrs", required=True, help='attribute list, e.g. "A B C"')
    p.add_argument("--out", required=True, help="secret-key output file")
    _add_rng_flags(p)
    p.set_defaults(func=_cmd_ac_keygen)

    p = sub.add_parser("do-encrypt", help="owner: encrypt under a policy")
    p.add_argument("--pp", required=True)
    p.add_argument("--policy", required=True, help='policy text, e.g. "A AND (B OR C)"')
    p.add_argument("--out", required=True, help="ciphertext output file")
    p.add_argument("--state-out", default=None, help="owner-state output (default <out>.state)")
    p.add_argument("--csum-out", default=None, help="checksum sidecar (default <out>.csum)")
    p.add_argument("--payload-in", default=None, help="file to protect with the session key")
    p.add_argument("--payload-out", default=None, help="payload output (default <out>.payload)")
    p.add_argument("--key-out", default=None, help="write the session key as hex")
    _add_rng_flags(p)
    p.set_defaults(func=_cmd_do_encrypt)

    p = sub.add_parser("do-delegate", help="owner: authorize a policy tightening")
    p.add_argument("--pp", required=True)
    p.add_argument("--state", required=True, help="current owner-state file")
    p.add_argument("--policy", required=True, help="additional policy to AND in")
    p.add_argument("--out", required=True, help="delegation output file")
    p.add_argument("--state-out", default=None, help="new owner-state (default <out>.state)")
    _add_rng_flags(p)
    p.set_defaults(func=_cmd_do_delegate)

    p = sub.add_parser("cs-revoke", help="cloud: apply a delegation to a ciphertext")
    p.add_argument("--pp", required=True)
    p.add_argument("--ct", required=True)
    p.add_argument("--dg", required=True)
    p.add_argument("--out", required=True, help="revoked-ciphertext output file")
    _add_rng_flags(p)
    p.set_defaults(func=_cmd_cs_revoke)

    p = sub.add_parser("du-decrypt", help="user: decrypt a fresh ciphertext")
    p.add_argument("--pp", required=True)
    p.add_argument("--sk", required=True)
    p.add_argument("--ct", required=True)
    p.add_argument("--csum-out", default=None, help="retained checksum (default <ct>.csum)")
    p.add_argument("--payload", default=None, help="payload file to open")
    p.add_argument("--payload-out", default=None, help="plaintext output (default <payload>.plain)")
    p.add_argument("--key-out", default=None, help="write the session key as hex")
    p.set_defaults(func=_cmd_du_decrypt)

    p = sub.add_parser(
        "du-decrypt-revoked", help="user: decrypt a revoked ciphertext"
    )
    p.add_argument("--pp", required=True)
    p.add_argument("--sk", required=True)
    p.add_argument("--ct", required=True)
    p.add_argument("--csum", required=True, help="checksum sidecar retained from the original")
    p.add_argument("--payload", default=None)
    p.add_argument("--payload-out", default=None)
    p.add_argument("--key-out", default=None)
    p.set_defaults(func=_cmd_du_decrypt_revoked)

    p = sub.add_parser("policy-check", help="compile a policy and print its shape")
    p.add_argument("policy_text", nargs="?", default=None)
    p.add_argument("--policy", default=None)
    p.set_defaults(func=_cmd_policy_check)

    p = sub.add_parser("bench", help="run the measurement suite")
    p.add_argument("--grid", default="10,20,30,40,50,60,70,80,90,100")
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", default="bench.csv")
    p.add_argument("--plots-dir", default=None)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cmd = args.command
    try:
        return args.func(args)
    except NotSatisfiedError as exc:
        print(f"rfab: {cmd}: not-satisfied: {exc}", file=sys.stderr)
        return 3
    except PreverificationError as exc:
        print(f"rfab: {cmd}: preverify: {exc}", file=sys.stderr)
        return 4
    except (IntegrityError, InvalidTag) as exc:
        detail = str(exc) or "payload authentication failed"
        print(f"rfab: {cmd}: integrity: {detail}", file=sys.stderr)
        return 5
    except DecodeError as exc:
        print(f"rfab: {cmd}: decode: {exc}", file=sys.stderr)
        return 6
    except OSError as exc:
        print(f"rfab: {cmd}: io: {exc}", file=sys.stderr)
        return 6
    except PolicySyntaxError as exc:
        print(f"rfab: {cmd}: policy: {exc}", file=sys.stderr)
        return 2
    except (PolicyError, DelegationError, _UsageError, ValueError) as exc:
        print(f"rfab: {cmd}: usage: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
