"""Boolean access policies: grammar, span-program compilation, solving.

A policy compiles to a matrix M (n1 x n2 over Z_p) with a row-to-attribute
map pi. rho(i) is the occurrence index of pi(i) among rows 1..i and tau the
maximum occurrence count; decryption groups rows by rho.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Union

from . import _backend
from .errors import PolicyError, PolicySyntaxError
from .groups import GROUP_ORDER


@dataclass(frozen=True)
class Leaf:
    attribute: str


@dataclass(frozen=True)
class And:
    left: "PolicyAst"
    right: "PolicyAst"


@dataclass(frozen=True)
class Or:
    left: "PolicyAst"
    right: "PolicyAst"


PolicyAst = Union[Leaf, And, Or]

_ATTR_RE = re.compile(r"[A-Za-z0-9_:.\-]+")
_KEYWORDS = {"AND", "OR"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch == "(":
            tokens.append(("LPAREN", ch, pos))
            pos += 1
            continue
        if ch == ")":
            tokens.append(("RPAREN", ch, pos))
            pos += 1
            continue
        m = _ATTR_RE.match(text, pos)
        if not m:
            raise PolicySyntaxError(f"unexpected character {ch!r}", pos)
        word = m.group(0)
        tokens.append((word if word in _KEYWORDS else "ATTR", word, pos))
        pos = m.end()
    return tokens


def parse_policy(text: str) -> PolicyAst:
    """Parse policy text. AND binds tighter than OR; both left-associative."""
    tokens = _tokenize(text)
    if not tokens:
        raise PolicySyntaxError("empty policy", 0)
    index = 0

    def peek() -> tuple[str, str, int]:
        return tokens[index] if index < len(tokens) else ("END", "", len(text))

    def advance() -> tuple[str, str, int]:
        nonlocal index
        tok = peek()
        index += 1
        return tok

    def parse_atom() -> PolicyAst:
        kind, value, pos = advance()
        if kind == "ATTR":
            return Leaf(value)
        if kind == "LPAREN":
            node = parse_or()
            kind2, _, pos2 = advance()
            if kind2 != "RPAREN":
                raise PolicySyntaxError("expected ')'", pos2)
            return node
        raise PolicySyntaxError(f"expected attribute or '(', got {value or 'end of input'!r}", pos)

    def parse_and() -> PolicyAst:
        node = parse_atom()
        while peek()[0] == "AND":
            advance()
            node = And(node, parse_atom())
        return node

    def parse_or() -> PolicyAst:
        node = parse_and()
        while peek()[0] == "OR":
            advance()
            node = Or(node, parse_and())
        return node

    ast = parse_or()
    kind, value, pos = peek()
    if kind != "END":
        raise PolicySyntaxError(f"unexpected token {value!r}", pos)
    return ast


def evaluate(ast: PolicyAst, attrs: Iterable[str]) -> bool:
    """Truth-value of the formula on an attribute set (test oracle route)."""
    attrs = set(attrs)

    def ev(node: PolicyAst) -> bool:
        if isinstance(node, Leaf):
            return node.attribute in attrs
        if isinstance(node, And):
            return ev(node.left) and ev(node.right)
        return ev(node.left) or ev(node.right)

    return ev(ast)


@dataclass(frozen=True)
class MspPolicy:
    matrix: tuple[tuple[int, ...], ...]
    pi: tuple[str, ...]
    rho: tuple[int, ...]
    tau: int

    @property
    def n1(self) -> int:
        return len(self.matrix)

    @property
    def n2(self) -> int:
        return len(self.matrix[0])

    @cached_property
    def row_nonzeros(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per row, the (column, value) pairs with a nonzero value."""
        return tuple(
            tuple((j, v) for j, v in enumerate(row) if v) for row in self.matrix
        )

    @cached_property
    def _solver_rows(self) -> tuple[bytes, ...]:
        # per-row record for the backend solver: entry count, then
        # (column, 32-byte scalar) pairs, big-endian throughout
        out = []
        for row in self.row_nonzeros:
            rec = [len(row).to_bytes(4, "big")]
            for j, v in row:
                rec.append(j.to_bytes(4, "big"))
                rec.append(v.to_bytes(32, "big"))
            out.append(b"".join(rec))
        return tuple(out)

    @cached_property
    def _solver_payload(self) -> bytes:
        # every row selected, the usual case for AND-heavy policies
        return b"".join(self._solver_rows)

    def attributes(self) -> frozenset[str]:
        return frozenset(self.pi)


def _occurrences(pi: tuple[str, ...]) -> tuple[int, ...]:
    seen: dict[str, int] = {}
    out = []
    for attr in pi:
        seen[attr] = seen.get(attr, 0) + 1
        out.append(seen[attr])
    return tuple(out)


def make_msp(matrix: Iterable[Iterable[int]], pi: Iterable[str]) -> MspPolicy:
    """Build an MspPolicy from raw rows, recomputing rho and tau."""
    rows = tuple(tuple(int(e) % GROUP_ORDER for e in row) for row in matrix)
    pi = tuple(pi)
    if not rows or not rows[0]:
        raise PolicyError("policy matrix must be at least 1x1")
    if len(rows) != len(pi):
        raise PolicyError("matrix rows and attribute map disagree")
    if any(len(r) != len(rows[0]) for r in rows):
        raise PolicyError("ragged policy matrix")
    rho = _occurrences(pi)
    return MspPolicy(matrix=rows, pi=pi, rho=rho, tau=max(rho))


def compile_msp(ast: PolicyAst) -> MspPolicy:
    """Vector-labeling compilation (Lewko-Waters style).

    Root gets (1). OR passes the parent vector to both children. AND with
    global counter c extends: left = parent padded to c then 1 appended,
    right = c zeros then -1. Rows are leaves in depth-first order, padded
    to the final counter width.
    """
    rows: list[tuple[str, list[int]]] = []
    counter = 1

    def walk(node: PolicyAst, vec: list[int]) -> None:
        nonlocal counter
        if isinstance(node, Leaf):
            rows.append((node.attribute, vec))
            return
        if isinstance(node, Or):
            walk(node.left, vec)
            walk(node.right, vec)
            return
        left = vec + [0] * (counter - len(vec)) + [1]
        right = [0] * counter + [-1]
        counter += 1
        walk(node.left, left)
        walk(node.right, right)

    walk(ast, [1])
    n2 = counter
    return make_msp(
        (vec + [0] * (n2 - len(vec)) for _, vec in rows),
        (attr for attr, _ in rows),
    )


def compile_policy(text: str) -> MspPolicy:
    return compile_msp(parse_policy(text))


def solve_coefficients(policy: MspPolicy, attrs: Iterable[str]) -> dict[int, int] | None:
    """Coefficients gamma over I = {i : pi(i) in attrs} with
    sum gamma_i * M_i = (1,0,...,0), or None when the rows cannot span it.

    Deterministic: Gaussian elimination over Z_p on the transposed system,
    pivot = first remaining row with a nonzero entry, free variables 0.
    """
    attrs = set(attrs)
    rows_i = [i for i in range(policy.n1) if policy.pi[i] in attrs]
    if not rows_i:
        return None
    if len(rows_i) == policy.n1:
        payload = policy._solver_payload
    else:
        records = policy._solver_rows
        payload = b"".join(records[i] for i in rows_i)
    solved = _backend.msp_solve(policy.n2, payload)
    if solved is None:
        return None
    return {
        i: int.from_bytes(solved[32 * k : 32 * k + 32], "big")
        for k, i in enumerate(rows_i)
    }


def satisfies(policy: MspPolicy, attrs: Iterable[str]) -> bool:
    return solve_coefficients(policy, attrs) is not None


def and_compose(m: MspPolicy, m_tilde: MspPolicy) -> MspPolicy:
    """AND-composition used by revocation.

    M' is (n1+n1~) x (n2+n2~): top-left M, column n2+1 of the top rows holds
    the negated first column of M, bottom-right M~. Attribute sets must be
    disjoint so occurrence bookkeeping stays well-defined.
    """
    if m.attributes() & m_tilde.attributes():
        raise PolicyError("composed policies must use disjoint attribute sets")
    p = GROUP_ORDER
    top = [list(row) + [(-row[0]) % p] + [0] * (m_tilde.n2 - 1) for row in m.matrix]
    bottom = [[0] * m.n2 + list(row) for row in m_tilde.matrix]
    return make_msp(top + bottom, m.pi + m_tilde.pi)


def validate_lemma1(m: MspPolicy, m_tilde: MspPolicy, attrs: Iterable[str]) -> bool:
    """True iff composed satisfiability == conjunction of the two inputs'."""
    attrs = set(attrs)
    separately = satisfies(m, attrs) and satisfies(m_tilde, attrs)
    composed = satisfies(and_compose(m, m_tilde), attrs)
    return separately == composed
