import random

from hypothesis import given, settings, strategies as st

from pnfa.automaton import Pnfa, btr, btr_measure, nfa_membership, underlying_nfa
from pnfa.construct import java_pnfa, thompson_prioritized
from pnfa.flatten import flatten, flatten_with_log, is_final_closed, is_flat, leaves, rbar
from pnfa.regex import parse, random_corpus

from oracles import btr_reference, words


def random_pnfa(rng: random.Random, n: int, alphabet: str = "ab") -> Pnfa:
    """Arbitrary pNFA: ε-cycles, repeated priorities and final choice states allowed."""
    choice = {q for q in range(n) if rng.random() < 0.5}
    d1 = {(q, c): rng.randrange(n) for q in range(n) if q not in choice for c in alphabet
          if rng.random() < 0.6}
    d2 = {q: tuple(rng.randrange(n) for _ in range(rng.randint(0, 3))) for q in choice}
    finals = {q for q in range(n) if rng.random() < 0.3}
    return Pnfa(n, alphabet, 0, d1, d2, frozenset(finals), frozenset(choice))


def test_rbar_examples():
    assert rbar("pqppq") == tuple("pqpq")
    assert rbar("p") == ("p",)
    assert rbar("pppp") == ("p", "p")
    assert rbar("") == ()


@given(st.lists(st.integers(0, 4), max_size=20))
def test_rbar_keeps_first_two_in_order(seq):
    out = rbar(seq)
    assert all(out.count(x) == min(2, seq.count(x)) for x in set(seq))
    it = iter(seq)
    assert all(any(x == y for y in it) for x in out)  # order-preserving subsequence


def test_already_flat_is_unchanged():
    a = Pnfa(3, "a", 0, {(1, "a"): 2}, {0: (1,)}, frozenset({2}), frozenset({0}))
    assert flatten(a).delta2 == {0: (1,)}


def test_thompson_union_star_entry():
    a = thompson_prioritized(parse("(a|b)*"))
    f = flatten(a)
    names = {f.names[q]: q for q in range(f.n_states)}
    assert [f.names[q] for q in f.delta2[f.initial]] == ["s2", "s6", "x5"]
    assert all(t not in f.choice for ts in f.delta2.values() for t in ts)
    assert f.initial in f.finals and names["x5"] in f.finals


def test_chain_of_choice_states_collapses():
    # 0 -> 1 -> 2 by ε, 2 reads a
    a = Pnfa(4, "a", 0, {(2, "a"): 3}, {0: (1,), 1: (2,)}, frozenset({3}), frozenset({0, 1}))
    res = flatten_with_log(a)
    f = res.automaton
    assert 1 not in res.state_map
    assert f.delta2[f.initial] == (res.state_map[2],)


def test_d_uses_per_branch_counters():
    # 0 prefers 1, which loops back to 0; the revisit may only try 0's later branches
    a = Pnfa(3, "a", 0, {(2, "a"): 2}, {0: (1, 2), 1: (0,)}, frozenset(), frozenset({0, 1}))
    assert leaves(a, 0) == (2, 2)
    assert flatten(a, prune=False).delta2[0] == (2, 2)


def test_trace_lists_calls():
    res = flatten_with_log(thompson_prioritized(parse("(a|b)*")), trace=True)
    assert res.trace[0] == "d(k0, {})"
    assert "  d(u1, {k0:1})" in res.trace


def test_final_choice_state_is_kept_final():
    # 0 -> 1 by ε where 1 is a final choice state with no alternatives
    a = Pnfa(2, "a", 0, {}, {0: (1,), 1: ()}, frozenset({1}), frozenset({0, 1}))
    f = flatten(a)
    assert nfa_membership(underlying_nfa(f), "")


def test_flatten_preserves_language_and_shrinks_runs():
    for e in random_corpus(51, 250, max_size=8):
        for build in (java_pnfa, thompson_prioritized):
            a = build(e, "ab")
            f = flatten(a)
            assert is_flat(f) and is_final_closed(f)
            na, nf = underlying_nfa(a), underlying_nfa(f)
            for w in words("ab", 6):
                assert nfa_membership(na, w) == nfa_membership(nf, w)
                assert btr_measure(f, w).size <= btr_measure(a, w).size


def test_flatten_random_pnfas():
    rng = random.Random(52)
    for _ in range(300):
        a = random_pnfa(rng, rng.randint(1, 6))
        f = flatten(a)
        assert is_flat(f) and is_final_closed(f)
        for w in words("ab", 4):
            assert nfa_membership(underlying_nfa(a), w) == nfa_membership(underlying_nfa(f), w)
            ta, tf = btr_reference(a, w), btr(f, w)
            assert tf.size() <= ta.size()


def test_flatten_is_idempotent():
    for e in random_corpus(53, 200, max_size=8):
        for build in (java_pnfa, thompson_prioritized):
            f = flatten(build(e, "ab"))
            assert flatten(f) == f


def test_sequences_are_bounded():
    for e in random_corpus(54, 200, max_size=8):
        a = thompson_prioritized(e, "ab")
        f = flatten(a)
        bound = 2 * len(a.reading)
        assert all(len(ts) <= bound for ts in f.delta2.values())


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_no_choice_targets_after_flattening(seed):
    a = random_pnfa(random.Random(seed), 5)
    f = flatten(a, prune=False)
    assert f.n_states == a.n_states
    assert all(t not in f.choice for ts in f.delta2.values() for t in ts)
