"""Canonical binary and armored serialization for every artifact kind.

Wire layout: 4-byte magic "RFAB", version byte, kind byte, then a
kind-specific body. All bodies begin with the curve identifier. Vectors
and strings are 4-byte big-endian length-prefixed; scalars are 32-byte
big-endian reduced values; group points use their compressed encodings.
Encoding is canonical: the same artifact always produces identical bytes.
"""

from __future__ import annotations

import base64
import binascii
from enum import IntEnum

from .core import Ciphertext, MasterSecretKey, OwnerState, PublicParams, SecretKey
from .errors import DecodeError, DecodeErrorCode, PolicyError
from .groups import (
    CURVE_ID,
    G1_BYTES,
    G2_BYTES,
    GROUP_ORDER,
    GT_BYTES,
    H1_ID,
    H2C_SUITE,
    SCALAR_BYTES,
    G1Elem,
    G2Elem,
    GTElem,
    default_env,
)
from .policy import MspPolicy, make_msp
from .revocation import Delegation, RevokedCiphertext

MAGIC = b"RFAB"
VERSION = 1


class Kind(IntEnum):
    PP = 1
    MSK = 2
    SK = 3
    CT = 4
    CTREV = 5
    DG = 6
    STATE = 7


_LABELS = {
    Kind.PP: "RFAB-PP",
    Kind.MSK: "RFAB-MSK",
    Kind.SK: "RFAB-SK",
    Kind.CT: "RFAB-CT",
    Kind.CTREV: "RFAB-CTREV",
    Kind.DG: "RFAB-DG",
    Kind.STATE: "RFAB-STATE",
}


def _w_u32(out: bytearray, value: int) -> None:
    out += value.to_bytes(4, "big")


def _w_scalar(out: bytearray, value: int) -> None:
    out += (value % GROUP_ORDER).to_bytes(SCALAR_BYTES, "big")


def _w_string(out: bytearray, text: str) -> None:
    raw = text.encode("utf-8")
    _w_u32(out, len(raw))
    out += raw


class _Reader:
    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise DecodeError(
                DecodeErrorCode.TRUNCATED, f"truncated while reading {what}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self, what: str) -> int:
        return int.from_bytes(self.take(4, what), "big")

    def scalar(self, what: str) -> int:
        value = int.from_bytes(self.take(SCALAR_BYTES, what), "big")
        if value >= GROUP_ORDER:
            raise DecodeError(
                DecodeErrorCode.BAD_ENCODING,
                f"{what} is not reduced modulo the group order",
            )
        return value

    def string(self, what: str) -> str:
        raw = self.take(self.u32(what), what)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise DecodeError(
                DecodeErrorCode.BAD_ENCODING, f"{what} is not valid UTF-8"
            ) from None

    def _point(self, cls, size: int, what: str):
        raw = self.take(size, what)
        try:
            return cls.from_bytes(raw)
        except ValueError as exc:
            code = (
                DecodeErrorCode.NOT_IN_SUBGROUP
                if "not-in-subgroup" in str(exc)
                else DecodeErrorCode.BAD_ENCODING
            )
            raise DecodeError(code, f"{what}: {exc}") from None

    def g1(self, what: str) -> G1Elem:
        return self._point(G1Elem, G1_BYTES, what)

    def g2(self, what: str) -> G2Elem:
        return self._point(G2Elem, G2_BYTES, what)

    def gt(self, what: str) -> GTElem:
        return self._point(GTElem, GT_BYTES, what)

    def curve(self) -> None:
        curve = self.string("curve identifier")
        if curve != CURVE_ID:
            raise DecodeError(
                DecodeErrorCode.BAD_ENCODING, f"unsupported curve {curve!r}"
            )


def _write_policy(out: bytearray, policy: MspPolicy) -> None:
    _w_u32(out, policy.n1)
    _w_u32(out, policy.n2)
    for row in policy.matrix:
        for entry in row:
            _w_scalar(out, entry)
    for attr in policy.pi:
        _w_string(out, attr)


def _read_policy(r: _Reader) -> MspPolicy:
    n1 = r.u32("policy row count")
    n2 = r.u32("policy column count")
    if n1 == 0 or n2 == 0:
        raise DecodeError(
            DecodeErrorCode.BAD_ENCODING, "policy dimensions must be positive"
        )
    matrix = [
        tuple(r.scalar("policy matrix entry") for _ in range(n2)) for _ in range(n1)
    ]
    pi = [r.string("policy attribute label") for _ in range(n1)]
    try:
        return make_msp(matrix, pi)
    except PolicyError as exc:
        raise DecodeError(
            DecodeErrorCode.BAD_ENCODING, f"policy rejected: {exc}"
        ) from None


def _write_pp(out: bytearray, pp: PublicParams) -> None:
    _w_string(out, pp.h2c_suite)
    _w_string(out, pp.h1_id)
    out += pp.varphi.to_bytes()
    out += pp.phi.to_bytes()
    out += pp.mpk.to_bytes()


def _read_pp(r: _Reader) -> PublicParams:
    h2c_suite = r.string("hash-to-curve suite id")
    h1_id = r.string("scalar-hash id")
    if h2c_suite != H2C_SUITE or h1_id != H1_ID:
        raise DecodeError(
            DecodeErrorCode.BAD_ENCODING, "unsupported hash profile in parameters"
        )
    varphi = r.g1("checksum base varphi")
    phi = r.g1("checksum base phi")
    mpk = r.gt("master public key")
    return PublicParams(env=default_env(), varphi=varphi, phi=phi, mpk=mpk)


def _write_msk(out: bytearray, msk: MasterSecretKey) -> None:
    _w_scalar(out, msk.alpha)


def _read_msk(r: _Reader) -> MasterSecretKey:
    return MasterSecretKey(alpha=r.scalar("master secret"))


def _write_sk(out: bytearray, sk: SecretKey) -> None:
    attrs = sorted(sk.attrs)
    _w_u32(out, len(attrs))
    for attr in attrs:
        _w_string(out, attr)
        out += sk.sk2[attr].to_bytes()
    out += sk.sk1.to_bytes()
    out += sk.sk3.to_bytes()


def _read_sk(r: _Reader) -> SecretKey:
    m = r.u32("attribute count")
    if m == 0:
        raise DecodeError(DecodeErrorCode.BAD_ENCODING, "key has no attributes")
    sk2: dict[str, G1Elem] = {}
    prev: str | None = None
    for _ in range(m):
        attr = r.string("key attribute label")
        if prev is not None and attr <= prev:
            raise DecodeError(
                DecodeErrorCode.BAD_ENCODING,
                "key attributes must be strictly sorted",
            )
        prev = attr
        sk2[attr] = r.g1("key attribute component")
    sk1 = r.g1("key component sk1")
    sk3 = r.g2("key component sk3")
    return SecretKey(attrs=frozenset(sk2), sk1=sk1, sk2=sk2, sk3=sk3)


def _write_ct(out: bytearray, ct: Ciphertext) -> None:
    _write_policy(out, ct.policy)
    _w_u32(out, ct.revocation_depth)
    out += ct.ct1.to_bytes()
    _w_u32(out, len(ct.ct2))
    for elem in ct.ct2:
        out += elem.to_bytes()
    _w_u32(out, len(ct.ct3))
    for elem in ct.ct3:
        out += elem.to_bytes()
    out += ct.ct4.to_bytes()
    out += ct.ct5.to_bytes()
    out += ct.csum.to_bytes()


def _read_ct(r: _Reader, kind: Kind) -> Ciphertext:
    policy = _read_policy(r)
    depth = r.u32("revocation depth")
    if kind is Kind.CT and depth != 0:
        raise DecodeError(
            DecodeErrorCode.BAD_KIND, "fresh-ciphertext envelope with nonzero depth"
        )
    if kind is Kind.CTREV and depth == 0:
        raise DecodeError(
            DecodeErrorCode.BAD_KIND, "revoked-ciphertext envelope with zero depth"
        )
    ct1 = r.g2("ciphertext component ct1")
    n_slots = r.u32("slot count")
    ct2 = tuple(r.g2("ciphertext slot component") for _ in range(n_slots))
    if (depth == 0 and n_slots != policy.tau) or n_slots < policy.tau:
        raise DecodeError(
            DecodeErrorCode.LENGTH_MISMATCH,
            f"slot count {n_slots} inconsistent with policy tau {policy.tau}",
        )
    n_rows = r.u32("row count")
    if n_rows != policy.n1:
        raise DecodeError(
            DecodeErrorCode.LENGTH_MISMATCH,
            f"row count {n_rows} does not match policy rows {policy.n1}",
        )
    ct3 = tuple(r.g1("ciphertext row component") for _ in range(n_rows))
    ct4 = r.gt("ciphertext component ct4")
    ct5 = r.gt("ciphertext component ct5")
    csum = r.g1("ciphertext checksum")
    cls = Ciphertext if depth == 0 else RevokedCiphertext
    return cls(
        policy=policy,
        ct1=ct1,
        ct2=ct2,
        ct3=ct3,
        ct4=ct4,
        ct5=ct5,
        csum=csum,
        revocation_depth=depth,
    )


def _write_dg(out: bytearray, dg: Delegation) -> None:
    _write_policy(out, dg.policy_tilde)
    _w_u32(out, len(dg.dt1))
    for idx in sorted(dg.dt1):
        _w_u32(out, idx)
        out += dg.dt1[idx].to_bytes()
    _w_u32(out, len(dg.dt2))
    for elem in dg.dt2:
        out += elem.to_bytes()
    _w_u32(out, len(dg.dt3))
    for slot in sorted(dg.dt3):
        _w_u32(out, slot)
        out += dg.dt3[slot].to_bytes()
    _w_u32(out, len(dg.w_prime))
    for scalar in dg.w_prime:
        _w_scalar(out, scalar)


def _read_dg(r: _Reader) -> Delegation:
    policy_tilde = _read_policy(r)
    n_dt1 = r.u32("delegation row-term count")
    if n_dt1 != policy_tilde.n1:
        raise DecodeError(
            DecodeErrorCode.LENGTH_MISMATCH,
            f"row-term count {n_dt1} does not match policy rows {policy_tilde.n1}",
        )
    dt1: dict[int, G1Elem] = {}
    prev = -1
    for _ in range(n_dt1):
        idx = r.u32("delegation row index")
        if idx <= prev or idx >= policy_tilde.n1:
            raise DecodeError(
                DecodeErrorCode.BAD_ENCODING, "delegation row indexes malformed"
            )
        prev = idx
        dt1[idx] = r.g1("delegation row term")
    n_dt2 = r.u32("delegation slot count")
    dt2 = tuple(r.g2("delegation slot term") for _ in range(n_dt2))
    n_dt3 = r.u32("delegation extra-slot count")
    dt3: dict[int, G2Elem] = {}
    for _ in range(n_dt3):
        slot = r.u32("delegation extra-slot index")
        dt3[slot] = r.g2("delegation extra-slot term")
    expected = list(range(n_dt2 - n_dt3 + 1, n_dt2 + 1))
    if sorted(dt3) != expected:
        raise DecodeError(
            DecodeErrorCode.BAD_ENCODING,
            "delegation extra slots must be the trailing slot indexes",
        )
    n_w = r.u32("delegation scalar count")
    if n_w != n_dt2:
        raise DecodeError(
            DecodeErrorCode.LENGTH_MISMATCH,
            f"scalar count {n_w} does not match slot count {n_dt2}",
        )
    w_prime = tuple(r.scalar("delegation slot scalar") for _ in range(n_w))
    return Delegation(
        policy_tilde=policy_tilde, dt1=dt1, dt2=dt2, dt3=dt3, w_prime=w_prime
    )


def _write_state(out: bytearray, state: OwnerState) -> None:
    _write_policy(out, state.policy)
    _w_u32(out, len(state.w))
    for scalar in state.w:
        _w_scalar(out, scalar)
    _w_u32(out, state.revocation_depth)


def _read_state(r: _Reader) -> OwnerState:
    policy = _read_policy(r)
    n_w = r.u32("state scalar count")
    w = tuple(r.scalar("state slot scalar") for _ in range(n_w))
    depth = r.u32("state revocation depth")
    if (depth == 0 and n_w != policy.tau) or n_w < policy.tau:
        raise DecodeError(
            DecodeErrorCode.LENGTH_MISMATCH,
            f"state scalar count {n_w} inconsistent with policy tau {policy.tau}",
        )
    return OwnerState(policy=policy, w=w, revocation_depth=depth)


def kind_of(artifact) -> Kind:
    if isinstance(artifact, PublicParams):
        return Kind.PP
    if isinstance(artifact, MasterSecretKey):
        return Kind.MSK
    if isinstance(artifact, SecretKey):
        return Kind.SK
    if isinstance(artifact, Ciphertext):
        return Kind.CT if artifact.revocation_depth == 0 else Kind.CTREV
    if isinstance(artifact, Delegation):
        return Kind.DG
    if isinstance(artifact, OwnerState):
        return Kind.STATE
    raise TypeError(f"not a serializable artifact: {type(artifact).__name__}")


def encode(artifact) -> bytes:
    kind = kind_of(artifact)
    out = bytearray()
    out += MAGIC
    out.append(VERSION)
    out.append(kind)
    _w_string(out, CURVE_ID)
    if kind is Kind.PP:
        _write_pp(out, artifact)
    elif kind is Kind.MSK:
        _write_msk(out, artifact)
    elif kind is Kind.SK:
        _write_sk(out, artifact)
    elif kind in (Kind.CT, Kind.CTREV):
        _write_ct(out, artifact)
    elif kind is Kind.DG:
        _write_dg(out, artifact)
    else:
        _write_state(out, artifact)
    return bytes(out)


def decode(data: bytes):
    if len(data) < 6:
        raise DecodeError(DecodeErrorCode.TRUNCATED, "shorter than the fixed header")
    if data[:4] != MAGIC:
        raise DecodeError(DecodeErrorCode.BAD_MAGIC, "magic bytes are not RFAB")
    if data[4] != VERSION:
        raise DecodeError(
            DecodeErrorCode.BAD_VERSION, f"unsupported version {data[4]}"
        )
    try:
        kind = Kind(data[5])
    except ValueError:
        raise DecodeError(
            DecodeErrorCode.BAD_KIND, f"unknown artifact kind {data[5]}"
        ) from None
    r = _Reader(data)
    r.pos = 6
    r.curve()
    if kind is Kind.PP:
        artifact = _read_pp(r)
    elif kind is Kind.MSK:
        artifact = _read_msk(r)
    elif kind is Kind.SK:
        artifact = _read_sk(r)
    elif kind in (Kind.CT, Kind.CTREV):
        artifact = _read_ct(r, kind)
    elif kind is Kind.DG:
        artifact = _read_dg(r)
    else:
        artifact = _read_state(r)
    if r.pos != len(data):
        raise DecodeError(
            DecodeErrorCode.TRAILING_DATA,
            f"{len(data) - r.pos} unconsumed bytes after the body",
        )
    return artifact


def text_envelope(data: bytes, label: str | None = None) -> str:
    """Armor bytes as a BEGIN/END block with 64-column base64.

    Without an explicit label the artifact kind is sniffed from the
    envelope header, so armoring arbitrary bytes requires a label.
    """
    if label is None:
        if len(data) < 6 or data[:4] != MAGIC:
            raise ValueError("cannot infer an armor label from this payload")
        try:
            label = _LABELS[Kind(data[5])]
        except ValueError:
            raise ValueError("cannot infer an armor label from this payload") from None
    b64 = base64.b64encode(data).decode("ascii")
    lines = [b64[i : i + 64] for i in range(0, len(b64), 64)]
    return "\n".join([f"-----BEGIN {label}-----", *lines, f"-----END {label}-----"]) + "\n"


def parse_text_envelope(text: str, expected_label: str | None = None) -> bytes:
    lines = [line.strip() for line in text.splitlines()]
    i = 0
    while i < len(lines) and lines[i] == "":
        i += 1
    if (
        i == len(lines)
        or not lines[i].startswith("-----BEGIN ")
        or not lines[i].endswith("-----")
    ):
        raise DecodeError(DecodeErrorCode.BAD_ARMOR, "missing BEGIN line")
    label = lines[i][len("-----BEGIN ") : -len("-----")]
    if not label:
        raise DecodeError(DecodeErrorCode.BAD_ARMOR, "empty armor label")
    end_marker = f"-----END {label}-----"
    body: list[str] = []
    i += 1
    while i < len(lines) and lines[i] != end_marker:
        if lines[i].startswith("-----"):
            raise DecodeError(
                DecodeErrorCode.BAD_ARMOR, "unexpected marker inside armor body"
            )
        body.append(lines[i])
        i += 1
    if i == len(lines):
        raise DecodeError(DecodeErrorCode.BAD_ARMOR, f"missing END line for {label}")
    for line in lines[i + 1 :]:
        if line:
            raise DecodeError(
                DecodeErrorCode.BAD_ARMOR, "trailing content after END line"
            )
    if expected_label is not None and label != expected_label:
        raise DecodeError(
            DecodeErrorCode.BAD_ARMOR,
            f"expected {expected_label} armor, found {label}",
        )
    payload = "".join("".join(body).split())
    try:
        return base64.b64decode(payload, validate=True)
    except binascii.Error:
        raise DecodeError(
            DecodeErrorCode.BAD_ARMOR, "payload is not valid base64"
        ) from None
