"""Shared fixtures and randomized-instance generators for the suite."""

from __future__ import annotations

import random

import pytest

from rfab import And, Leaf, Or, SeededRandomSource, default_env, evaluate, setup


# One line per acceptance check, echoed as a terminal section at the end
# of the run so pass/fail status survives pytest's own output folding.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def env():
    return default_env()


@pytest.fixture(scope="session")
def authority(env):
    """One shared (pp, msk) pair for tests that don't need trapdoor traces."""
    rng = SeededRandomSource(0x5EED)
    return setup(env, rng)


def random_ast(rand: random.Random, max_depth: int = 4, pool: list[str] | None = None):
    """Random formula, depth-bounded; attribute reuse arises from the pool."""
    attrs = pool if pool is not None else [f"A{i}" for i in range(1, 13)]

    def build(depth: int):
        if depth >= max_depth or rand.random() < 0.35:
            return Leaf(rand.choice(attrs))
        node = And if rand.random() < 0.5 else Or
        return node(build(depth + 1), build(depth + 1))

    return build(0)


def ast_attributes(ast) -> set[str]:
    if isinstance(ast, Leaf):
        return {ast.attribute}
    return ast_attributes(ast.left) | ast_attributes(ast.right)


def satisfying_set(rand: random.Random, ast) -> set[str]:
    """A random assignment that makes the formula true."""
    out: set[str] = set()

    def pick(node):
        if isinstance(node, Leaf):
            out.add(node.attribute)
        elif isinstance(node, And):
            pick(node.left)
            pick(node.right)
        else:
            pick(rand.choice([node.left, node.right]))

    pick(ast)
    assert evaluate(ast, out)
    return out


def non_satisfying_set(rand: random.Random, ast, filler: str = "zz.none") -> set[str]:
    """A maximal-ish falsifying set, padded with one out-of-policy attribute
    so key generation (which rejects empty sets) still has input."""
    out: set[str] = set()
    attrs = sorted(ast_attributes(ast))
    rand.shuffle(attrs)
    for attr in attrs:
        if not evaluate(ast, out | {attr}):
            out.add(attr)
    assert not evaluate(ast, out)
    return out | {filler}
