"""Type-3 bilinear group environment over BLS12-381.

Wraps the compiled backend with operation counting, domain-separated hashing,
and injectable randomness. All scheme-level code goes through this module;
nothing else touches the backend directly.
"""

from __future__ import annotations

import hashlib
import secrets
from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field
from typing import Iterator, Protocol, Sequence

from . import _backend

CURVE_ID: str = _backend.curve_id()
GROUP_ORDER: int = int.from_bytes(_backend.group_order(), "big")

SCALAR_BYTES = 32
G1_BYTES = 48
G2_BYTES = 96
GT_BYTES = 576

# Domain-separation tags for hash_to_g1. The anchor tag realizes the
# distinguished hash slot used for share blinding; the checksum tags are
# reserved (checksum bases are sampled at setup, not hashed).
TAG_ANCHOR = "ANCHOR"
TAG_ATTR = "ATTR"
TAG_CHECKSUM_PHI = "CHECKSUM-PHI"
TAG_CHECKSUM_VARPHI = "CHECKSUM-VARPHI"
_VALID_TAGS = frozenset({TAG_ANCHOR, TAG_ATTR, TAG_CHECKSUM_PHI, TAG_CHECKSUM_VARPHI})

H2C_SUITE = "BLS12381G1_XMD:SHA-256_SSWU_RO_"
H1_ID = "SHA-512-wide"

_DST_PREFIX = "RFAB-V01-"
_H1_PREFIX = b"RFAB-V01-H1-SHA512-WIDE:"


@dataclass
class OpCounter:
    """Tally of group operations inside one count_ops scope."""

    pairings: int = 0
    exp_g1: int = 0
    exp_g2: int = 0
    exp_gt: int = 0
    mul_g1: int = 0
    mul_g2: int = 0
    mul_gt: int = 0
    hashes: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "pairings": self.pairings,
            "exp_g1": self.exp_g1,
            "exp_g2": self.exp_g2,
            "exp_gt": self.exp_gt,
            "mul_g1": self.mul_g1,
            "mul_g2": self.mul_g2,
            "mul_gt": self.mul_gt,
            "hashes": self.hashes,
        }


_ACTIVE: ContextVar[OpCounter | None] = ContextVar("rfab_op_counter", default=None)


@contextmanager
def count_ops() -> Iterator[OpCounter]:
    """Count group operations in this scope. Nested scopes count innermost."""
    counter = OpCounter()
    token = _ACTIVE.set(counter)
    try:
        yield counter
    finally:
        _ACTIVE.reset(token)


def _bump(attr: str, k: int = 1) -> None:
    counter = _ACTIVE.get()
    if counter is not None:
        setattr(counter, attr, getattr(counter, attr) + k)


class RandomSource(Protocol):
    def randbelow(self, n: int) -> int: ...


class SystemRandomSource:
    """OS randomness via the secrets module."""

    def randbelow(self, n: int) -> int:
        return secrets.randbelow(n)


class SeededRandomSource:
    """Deterministic SHA-512 counter generator for reproducible tests.

    Not for production use: the seed fully determines every sample.
    """

    def __init__(self, seed: int):
        self._key = hashlib.sha256(b"RFAB-SEED:" + str(seed).encode()).digest()
        self._counter = 0

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randbelow needs n > 0")
        self._counter += 1
        block = hashlib.sha512(self._key + self._counter.to_bytes(8, "big")).digest()
        # 512-bit wide reduction: bias below 2^-255 for n near 2^255
        return int.from_bytes(block, "big") % n


def _scalar_bytes(k: int) -> bytes:
    return (k % GROUP_ORDER).to_bytes(SCALAR_BYTES, "big")


class G1Elem:
    __slots__ = ("_raw",)

    def __init__(self, raw):
        self._raw = raw

    def __mul__(self, other: "G1Elem") -> "G1Elem":
        _bump("mul_g1")
        return G1Elem(self._raw.mul(other._raw))

    def __truediv__(self, other: "G1Elem") -> "G1Elem":
        _bump("mul_g1")
        return G1Elem(self._raw.mul(other._raw.inv()))

    def __pow__(self, k: int) -> "G1Elem":
        k %= GROUP_ORDER
        if k == 1:
            return self
        if k == 0:
            return G1Elem(_backend.G1.identity())
        _bump("exp_g1")
        return G1Elem(self._raw.pow(_scalar_bytes(k)))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, G1Elem) and self._raw == other._raw

    __hash__ = None  # type: ignore[assignment]

    def is_identity(self) -> bool:
        return self._raw.is_identity()

    def to_bytes(self) -> bytes:
        return self._raw.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "G1Elem":
        return cls(_backend.G1.from_bytes(data))


class G2Elem:
    __slots__ = ("_raw",)

    def __init__(self, raw):
        self._raw = raw

    def __mul__(self, other: "G2Elem") -> "G2Elem":
        _bump("mul_g2")
        return G2Elem(self._raw.mul(other._raw))

    def __truediv__(self, other: "G2Elem") -> "G2Elem":
        _bump("mul_g2")
        return G2Elem(self._raw.mul(other._raw.inv()))

    def __pow__(self, k: int) -> "G2Elem":
        k %= GROUP_ORDER
        if k == 1:
            return self
        if k == 0:
            return G2Elem(_backend.G2.identity())
        _bump("exp_g2")
        return G2Elem(self._raw.pow(_scalar_bytes(k)))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, G2Elem) and self._raw == other._raw

    __hash__ = None  # type: ignore[assignment]

    def is_identity(self) -> bool:
        return self._raw.is_identity()

    def to_bytes(self) -> bytes:
        return self._raw.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "G2Elem":
        return cls(_backend.G2.from_bytes(data))


class GTElem:
    __slots__ = ("_raw",)

    def __init__(self, raw):
        self._raw = raw

    def __mul__(self, other: "GTElem") -> "GTElem":
        _bump("mul_gt")
        return GTElem(self._raw.mul(other._raw))

    def __truediv__(self, other: "GTElem") -> "GTElem":
        # division counts as one multiplication; inversion is free
        _bump("mul_gt")
        return GTElem(self._raw.mul(other._raw.inv()))

    def __pow__(self, k: int) -> "GTElem":
        k %= GROUP_ORDER
        if k == 1:
            return self
        if k == 0:
            return GTElem(_backend.Gt.identity())
        _bump("exp_gt")
        return GTElem(self._raw.pow(_scalar_bytes(k)))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, GTElem) and self._raw == other._raw

    __hash__ = None  # type: ignore[assignment]

    def is_identity(self) -> bool:
        return self._raw.is_identity()

    def to_bytes(self) -> bytes:
        return self._raw.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "GTElem":
        return cls(_backend.Gt.from_bytes(data))


def pair(a: G1Elem, b: G2Elem) -> GTElem:
    _bump("pairings")
    return GTElem(_backend.pair(a._raw, b._raw))


def multi_pair(pairs: Sequence[tuple[G1Elem, G2Elem]]) -> GTElem:
    """Product of pairings. Counts each pairing plus the combining muls."""
    if not pairs:
        raise ValueError("multi_pair needs at least one pair")
    _bump("pairings", len(pairs))
    _bump("mul_gt", len(pairs) - 1)
    return GTElem(_backend.multi_pair([(a._raw, b._raw) for a, b in pairs]))


_SCALAR_ZERO = (0).to_bytes(SCALAR_BYTES, "big")
_SCALAR_ONE = (1).to_bytes(SCALAR_BYTES, "big")


def g1_weighted_product(terms: Sequence[tuple[G1Elem, int]]) -> G1Elem:
    """Product of base**exponent terms in one backend call.

    Counted exactly like the equivalent pow/mul sequence: one G1
    exponentiation per exponent outside {0, 1} and len-1 multiplications.
    """
    if not terms:
        raise ValueError("weighted product needs at least one term")
    p = GROUP_ORDER
    exps = [k % p for _, k in terms]
    _bump("exp_g1", sum(1 for k in exps if k > 1))
    _bump("mul_g1", len(terms) - 1)
    return G1Elem(
        _backend.g1_weighted_product(
            [base._raw for base, _ in terms],
            b"".join(
                _SCALAR_ONE if k == 1 else _SCALAR_ZERO if k == 0 else k.to_bytes(32, "big")
                for k in exps
            ),
        )
    )


def hash_to_g1(tag: str, data: bytes) -> G1Elem:
    if tag not in _VALID_TAGS:
        raise ValueError(f"unknown hash tag: {tag!r}")
    _bump("hashes")
    dst = f"{_DST_PREFIX}{tag}-with-{H2C_SUITE}".encode()
    return G1Elem(_backend.hash_to_g1(dst, data))


def hash_to_scalar(data: bytes) -> int:
    """Hash bytes to a nonzero scalar (wide SHA-512 reduction)."""
    _bump("hashes")
    counter = 0
    msg = _H1_PREFIX + data
    while True:
        value = int.from_bytes(hashlib.sha512(msg).digest(), "big") % GROUP_ORDER
        if value != 0:
            return value
        msg = _H1_PREFIX + data + bytes([counter & 0xFF])
        counter += 1


@dataclass(frozen=True)
class GroupEnv:
    """Curve identity, group order, and the two generators."""

    curve_id: str
    p: int
    g1: G1Elem
    g2: G2Elem
    _gt_gen: GTElem = field(repr=False)

    # --- uncounted derivation/sampling helpers -------------------------
    # Key material and sampled randomness are free by the cost convention;
    # these bypass the counting wrappers on purpose.

    def g1_base(self, k: int) -> G1Elem:
        return G1Elem(self.g1._raw.pow(_scalar_bytes(k)))

    def g2_base(self, k: int) -> G2Elem:
        return G2Elem(self.g2._raw.pow(_scalar_bytes(k)))

    def gt_base(self, k: int) -> GTElem:
        return GTElem(self._gt_gen._raw.pow(_scalar_bytes(k)))

    def random_scalar(self, rng: RandomSource) -> int:
        return rng.randbelow(self.p)

    def random_scalar_nonzero(self, rng: RandomSource) -> int:
        while True:
            k = rng.randbelow(self.p)
            if k != 0:
                return k

    def random_g1(self, rng: RandomSource) -> G1Elem:
        return self.g1_base(self.random_scalar_nonzero(rng))

    def random_g2(self, rng: RandomSource) -> G2Elem:
        return self.g2_base(self.random_scalar_nonzero(rng))

    def random_gt(self, rng: RandomSource) -> GTElem:
        return self.gt_base(self.random_scalar_nonzero(rng))


def _make_env() -> GroupEnv:
    g1 = G1Elem(_backend.G1.generator())
    g2 = G2Elem(_backend.G2.generator())
    gt = GTElem(_backend.pair(g1._raw, g2._raw))
    return GroupEnv(curve_id=CURVE_ID, p=GROUP_ORDER, g1=g1, g2=g2, _gt_gen=gt)


_DEFAULT_ENV: GroupEnv | None = None


def default_env() -> GroupEnv:
    global _DEFAULT_ENV
    if _DEFAULT_ENV is None:
        _DEFAULT_ENV = _make_env()
    return _DEFAULT_ENV
