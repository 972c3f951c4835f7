"""Policy parsing, MSP compilation, the share-recovery solver, and
AND-composition.

Matrix examples are frozen from hand derivations of the distribution
algorithm (root vector (1); an AND node extends the counter and hands the
negated unit to its right child; an OR node copies its vector to both
children; rows appear in depth-first leaf order).
"""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rfab import (
    GROUP_ORDER,
    And,
    Leaf,
    Or,
    PolicyError,
    PolicySyntaxError,
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
from tests.conftest import ast_attributes, non_satisfying_set, random_ast, satisfying_set

P = GROUP_ORDER
NEG1 = P - 1


class TestParser:
    def test_single_attribute(self):
        assert parse_policy("A") == Leaf("A")

    def test_and_binds_tighter_than_or(self):
        assert parse_policy("A OR B AND C") == Or(Leaf("A"), And(Leaf("B"), Leaf("C")))
        assert parse_policy("A AND B OR C") == Or(And(Leaf("A"), Leaf("B")), Leaf("C"))

    def test_left_associative(self):
        assert parse_policy("A AND B AND C") == And(And(Leaf("A"), Leaf("B")), Leaf("C"))
        assert parse_policy("A OR B OR C") == Or(Or(Leaf("A"), Leaf("B")), Leaf("C"))

    def test_parentheses_override(self):
        assert parse_policy("(A OR B) AND C") == And(Or(Leaf("A"), Leaf("B")), Leaf("C"))
        assert parse_policy("((A))") == Leaf("A")

    def test_attribute_charset(self):
        assert parse_policy("dept:eng-1.2_x") == Leaf("dept:eng-1.2_x")

    def test_keywords_are_case_sensitive(self):
        # lowercase "and" is just an attribute token, which then dangles
        with pytest.raises(PolicySyntaxError) as exc:
            parse_policy("A and B")
        assert exc.value.position == 2

    @pytest.mark.parametrize(
        "text,position",
        [
            ("", 0),
            ("A AND", 5),
            ("(A", 2),
            (")A", 0),
            ("A B", 2),
            ("A&B", 1),
            ("A AND AND B", 6),
        ],
    )
    def test_error_positions(self, text, position):
        with pytest.raises(PolicySyntaxError) as exc:
            parse_policy(text)
        assert exc.value.position == position
        assert f"(at position {position})" in str(exc.value)

    def test_whitespace_insensitive(self):
        assert parse_policy("  A   AND\t(B OR C) ") == parse_policy("A AND (B OR C)")


class TestEvaluate:
    def test_truth_table(self):
        ast = parse_policy("A AND (B OR C)")
        assert evaluate(ast, {"A", "B"})
        assert evaluate(ast, {"A", "C"})
        assert not evaluate(ast, {"A"})
        assert not evaluate(ast, {"B", "C"})
        assert not evaluate(ast, set())

    def test_extraneous_attributes_ignored(self):
        assert evaluate(parse_policy("A"), {"A", "Z", "Q"})


class TestCompile:
    def test_single_leaf(self):
        policy = compile_policy("A")
        assert policy.matrix == ((1,),)
        assert policy.pi == ("A",)
        assert policy.rho == (1,)
        assert policy.tau == 1

    def test_and_pair(self):
        policy = compile_policy("A AND B")
        assert policy.matrix == ((1, 1), (0, NEG1))
        assert policy.pi == ("A", "B")
        assert policy.rho == (1, 1)
        assert policy.tau == 1

    def test_or_pair(self):
        policy = compile_policy("A OR B")
        assert policy.matrix == ((1,), (1,))
        assert policy.pi == ("A", "B")

    def test_and_chain(self):
        policy = compile_policy("A AND B AND C")
        assert policy.matrix == ((1, 1, 1), (0, 0, NEG1), (0, NEG1, 0))
        assert policy.pi == ("A", "B", "C")

    def test_repeated_attribute(self):
        policy = compile_policy("A AND (B OR A)")
        assert policy.matrix == ((1, 1), (0, NEG1), (0, NEG1))
        assert policy.pi == ("A", "B", "A")
        assert policy.rho == (1, 1, 2)
        assert policy.tau == 2

    def test_compile_policy_is_parse_then_compile(self):
        text = "(A OR B) AND (C OR D)"
        assert compile_policy(text) == compile_msp(parse_policy(text))


class TestMakeMsp:
    def test_rejects_empty(self):
        with pytest.raises(PolicyError):
            make_msp([], [])
        with pytest.raises(PolicyError):
            make_msp([[]], ["A"])

    def test_rejects_ragged(self):
        with pytest.raises(PolicyError):
            make_msp([[1, 0], [1]], ["A", "B"])

    def test_rejects_length_mismatch(self):
        with pytest.raises(PolicyError):
            make_msp([[1], [1]], ["A"])

    def test_reduces_entries_mod_p(self):
        policy = make_msp([[-1, P + 2]], ["A"])
        assert policy.matrix == ((NEG1, 2),)


class TestSolver:
    def test_single_row(self):
        policy = compile_policy("A")
        assert solve_coefficients(policy, {"A"}) == {0: 1}
        assert solve_coefficients(policy, {"B"}) is None

    def test_and_needs_both(self):
        policy = compile_policy("A AND B")
        assert solve_coefficients(policy, {"A", "B"}) == {0: 1, 1: 1}
        assert solve_coefficients(policy, {"A"}) is None
        assert solve_coefficients(policy, {"B"}) is None

    def test_repeated_attribute_uses_both_rows(self):
        policy = compile_policy("A AND (B OR A)")
        gamma = solve_coefficients(policy, {"A"})
        assert gamma == {0: 1, 2: 1}
        assert solve_coefficients(policy, {"B"}) is None

    def test_zero_coefficients_are_kept(self):
        policy = compile_policy("A OR B")
        gamma = solve_coefficients(policy, {"A", "B"})
        assert set(gamma) == {0, 1}
        assert sorted(gamma.values()) == [0, 1]

    def test_deterministic(self):
        policy = compile_policy("(A OR B) AND (C OR A)")
        attrs = {"A", "B", "C"}
        assert solve_coefficients(policy, attrs) == solve_coefficients(policy, attrs)

    def test_solution_reconstructs_unit_vector(self):
        policy = compile_policy("(A OR B) AND (C OR D) AND E")
        gamma = solve_coefficients(policy, {"A", "C", "E", "B"})
        target = [1] + [0] * (policy.n2 - 1)
        for j in range(policy.n2):
            acc = sum(g * policy.matrix[i][j] for i, g in gamma.items()) % P
            assert acc == target[j]


class TestAndCompose:
    def test_minimal_example(self):
        composed = and_compose(compile_policy("A"), compile_policy("B"))
        assert composed.matrix == ((1, NEG1), (0, 1))
        assert composed.pi == ("A", "B")

    def test_shapes(self):
        m = compile_policy("A AND (B OR A)")
        m_tilde = compile_policy("X OR Y")
        composed = and_compose(m, m_tilde)
        assert composed.n1 == m.n1 + m_tilde.n1
        assert composed.n2 == m.n2 + m_tilde.n2
        assert composed.pi == m.pi + m_tilde.pi
        # top-left block is M, bottom-right block is M~, link column negates
        for i, row in enumerate(m.matrix):
            assert composed.matrix[i][: m.n2] == row
            assert composed.matrix[i][m.n2] == (-row[0]) % P
            assert all(e == 0 for e in composed.matrix[i][m.n2 + 1 :])
        for k, row in enumerate(m_tilde.matrix):
            assert composed.matrix[m.n1 + k][: m.n2] == (0,) * m.n2
            assert composed.matrix[m.n1 + k][m.n2 :] == row

    def test_rho_spans_blocks(self):
        # occurrence counters restart per attribute, not per block
        composed = and_compose(compile_policy("A AND (B OR A)"), compile_policy("X"))
        assert composed.rho == (1, 1, 2, 1)
        assert composed.tau == 2

    def test_rejects_shared_attributes(self):
        with pytest.raises(PolicyError):
            and_compose(compile_policy("A AND B"), compile_policy("B OR C"))

    def test_satisfiability_is_conjunction(self):
        m = compile_policy("A OR B")
        m_tilde = compile_policy("X AND Y")
        composed = and_compose(m, m_tilde)
        assert satisfies(composed, {"A", "X", "Y"})
        assert not satisfies(composed, {"A", "B"})
        assert not satisfies(composed, {"X", "Y"})

    def test_validate_lemma1(self):
        m = compile_policy("A OR B")
        m_tilde = compile_policy("X AND Y")
        for attrs in ({"A", "X", "Y"}, {"A"}, {"X", "Y"}, set(), {"B", "X"}):
            assert validate_lemma1(m, m_tilde, attrs)


def _seeded_ast(seed: int, pool: list[str] | None = None):
    return random_ast(random.Random(seed), max_depth=4, pool=pool)


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_solver_agrees_with_evaluation(seed):
    rand = random.Random(seed)
    ast = random_ast(rand, max_depth=4)
    policy = compile_msp(ast)
    sat = satisfying_set(rand, ast)
    unsat = non_satisfying_set(rand, ast)
    gamma = solve_coefficients(policy, sat)
    assert gamma is not None
    # the recovered coefficients really do combine rows into (1, 0, ..., 0)
    for j in range(policy.n2):
        acc = sum(g * policy.matrix[i][j] for i, g in gamma.items()) % P
        assert acc == (1 if j == 0 else 0)
    assert solve_coefficients(policy, unsat) is None


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_satisfaction_is_monotone(seed):
    rand = random.Random(seed)
    ast = random_ast(rand, max_depth=4)
    policy = compile_msp(ast)
    sat = satisfying_set(rand, ast)
    assert satisfies(policy, sat | {"extra.one", "extra.two"})


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_compiled_rho_tau_match_occurrence_oracle(seed):
    ast = _seeded_ast(seed)
    policy = compile_msp(ast)
    seen: dict[str, int] = {}
    expected = []
    for attr in policy.pi:
        seen[attr] = seen.get(attr, 0) + 1
        expected.append(seen[attr])
    assert policy.rho == tuple(expected)
    assert policy.tau == max(expected)
    assert ast_attributes(ast) == set(policy.pi)


@settings(max_examples=40, deadline=None)
@given(
    seed_a=st.integers(min_value=0, max_value=2**31 - 1),
    seed_b=st.integers(min_value=0, max_value=2**31 - 1),
    seed_s=st.integers(min_value=0, max_value=2**31 - 1),
)
def test_lemma1_on_random_pairs(seed_a, seed_b, seed_s):
    pool_a = [f"a{i}" for i in range(8)]
    pool_b = [f"b{i}" for i in range(8)]
    m = compile_msp(_seeded_ast(seed_a, pool_a))
    m_tilde = compile_msp(_seeded_ast(seed_b, pool_b))
    rand = random.Random(seed_s)
    attrs = {a for a in pool_a + pool_b if rand.random() < 0.5}
    assert validate_lemma1(m, m_tilde, attrs)
