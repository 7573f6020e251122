import random

import pytest
from hypothesis import given, settings, strategies as st

from pnfa.construct import java_pnfa
from pnfa.regex import (EMPTY, EPS, BudgetExceeded, Kind, RegexSyntaxError, concat, hardness_gadget,
                        java_match, lazy_star, next_map, parse, random_ast, random_corpus, star, sym,
                        to_text, union)

from oracles import btr_reference, derivative_member, words


def test_star_binds_tighter_than_concat():
    assert parse("ab*") == concat(sym("a"), star(sym("b")))


def test_concat_binds_tighter_than_union():
    assert parse("ab|c") == union(concat(sym("a"), sym("b")), sym("c"))


def test_binary_operators_associate_left():
    assert parse("a|b|c") == union(union(sym("a"), sym("b")), sym("c"))
    assert parse("abc") == concat(concat(sym("a"), sym("b")), sym("c"))


def test_constants_and_lazy_star():
    assert parse("@eps") == EPS
    assert parse("ε") == EPS
    assert parse("@empty") == EMPTY
    assert parse("∅") == EMPTY
    assert parse("a*?") == lazy_star(sym("a"))
    assert parse("(a|a)*") == star(union(sym("a"), sym("a")))


def test_escapes_produce_literal_symbols():
    assert parse(r"\*\|") == concat(sym("*"), sym("|"))
    assert parse(r"\$").symbol == "$"


@pytest.mark.parametrize("text, index", [
    ("", 0), ("(a", 0), ("a)", 1), ("a|", 2), ("*a", 0), ("[a]", 0), ("a.b", 1), ("a+", 1),
])
def test_syntax_errors_carry_byte_offset(text, index):
    with pytest.raises(RegexSyntaxError) as info:
        parse(text)
    assert info.value.index == index
    assert f"byte {index}" in str(info.value)


def test_byte_offset_counts_utf8_bytes():
    with pytest.raises(RegexSyntaxError) as info:
        parse("ε)")
    assert info.value.index == 1
    assert info.value.offset == 2


def test_arity_matches_kind():
    for e in random_corpus(3, 200):
        for pos in e.positions():
            node = e.subtree(pos)
            want = {Kind.UNION: 2, Kind.CONCAT: 2, Kind.STAR: 1, Kind.LAZY_STAR: 1}.get(node.kind, 0)
            assert len(node.children) == want


def test_positions_are_prefix_closed_and_left_closed():
    for e in random_corpus(4, 100):
        ps = set(e.positions())
        for p in ps:
            if p:
                assert p[:-1] in ps
                if p[-1] > 1:
                    assert p[:-1] + (p[-1] - 1,) in ps


def test_next_map_examples():
    assert next_map(parse("ab")) == {(): None, (1,): (2,), (2,): None}
    assert next_map(parse("a*")) == {(): None, (1,): ()}
    assert next_map(parse("a|b")) == {(): None, (1,): None, (2,): None}
    assert next_map(EPS) == {(): None}


def test_next_map_clauses_hold_everywhere():
    for e in random_corpus(5, 200):
        nx = next_map(e)
        assert set(nx) == set(e.positions())
        assert nx[()] is None
        for v in nx:
            k = e.subtree(v).kind
            if k is Kind.UNION:
                assert nx[v + (1,)] == nx[v + (2,)] == nx[v]
            elif k is Kind.CONCAT:
                assert nx[v + (1,)] == v + (2,)
                assert nx[v + (2,)] == nx[v]
            elif k in (Kind.STAR, Kind.LAZY_STAR):
                assert nx[v + (1,)] == v


def test_java_match_examples():
    e = parse("(a|a)*")
    assert not java_match(e, "ab").matched
    assert java_match(e, "aa").matched
    r = java_match(e, "aaab")
    assert not r.matched
    # exhaustive recursive evaluation of the run tree on the Java pNFA
    assert r.invocations == btr_reference(java_pnfa(e), "aaab").steps() == 75


def test_java_match_budget_is_reported():
    with pytest.raises(BudgetExceeded) as info:
        java_match(parse("(a|a)*"), "a" * 30 + "b", budget=1000)
    assert info.value.count == 1000


def test_java_match_agrees_with_language_on_corpus():
    for e in random_corpus(6, 150, max_size=7):
        for w in words("ab", 5):
            assert java_match(e, w).matched == derivative_member(e, w), (to_text(e), w)


def test_java_match_agrees_with_java_pnfa_runs():
    for e in random_corpus(7, 120, max_size=7):
        a = java_pnfa(e, "ab")
        for w in words("ab", 4):
            t = btr_reference(a, w)
            assert java_match(e, w).matched == any(x == "Acc" for x in t.leaves())


def test_hardness_gadget_shape():
    g = hardness_gadget(parse("a*"), "a")
    gamma_star = star(union(sym("a"), sym("$")))
    expected = union(union(parse("a*"), concat(parse("a*"), sym("$"), gamma_star)),
                     concat(star(sym("a")), sym("$"), star(star(sym("a"))), sym("$")))
    assert g == expected


def test_hardness_gadget_rejects_marker_in_alphabet():
    with pytest.raises(ValueError):
        hardness_gadget(parse(r"a\$"), "a")
    with pytest.raises(ValueError):
        hardness_gadget(parse("b"), "a")


def test_random_ast_has_requested_size():
    rng = random.Random(0)
    for size in range(1, 9):
        assert random_ast(rng, size).size() == size


def test_random_corpus_is_deterministic():
    assert random_corpus(9, 30) == random_corpus(9, 30)


asts = st.integers(0, 10**6).map(lambda s: random_ast(random.Random(s), random.Random(s).randint(1, 10)))


@settings(max_examples=200, deadline=None)
@given(asts)
def test_to_text_round_trips(e):
    assert parse(to_text(e)) == e
