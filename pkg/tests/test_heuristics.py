from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ifspor.bits import iter_bits, popcount
from ifspor.heuristics import (
    EmptyCandidates,
    TripleBudgetExceeded,
    apifs,
    build_index,
    choose_action,
    closure,
    fixpoint_trace,
    lex_closure,
    min_closure,
    p_closure,
    p_set,
    pifs,
    rpifs,
    wraps,
)
from ifspor.model import SystemBuilder, dom_of_mask
from ifspor.traces import ifs_exact, is_covering, is_persistent

from .conftest import systems


def reachable(sys_):
    frontier = [sys_.initial_state()]
    seen = set(frontier)
    while frontier:
        s = frontier.pop()
        yield s
        for a in iter_bits(sys_.enabled(s)):
            t = sys_.step(s, a)
            if t not in seen:
                seen.add(t)
                frontier.append(t)


def test_first_to_fig1(f1):
    idx = build_index(f1)
    p = f1.process("P_ce")
    assert f1.names(idx.first_to[p][0][f1.action("a")]) == ["e"]


def test_first_to_lock_cycle():
    b = SystemBuilder("lock")
    b.client("C", "0").path("C", "0", "up", "1", "dn", "2")
    b.server("L", "a").trans("L", "a", "up", "t").trans("L", "t", "dn", "a")
    sys_ = b.build()
    idx = build_index(sys_)
    lock = sys_.process("L")
    assert sys_.names(idx.first_to[lock][0][sys_.action("dn")]) == ["up"]
    # the cycle makes the lock reach its own release again
    assert idx.first_to[lock][0].get(sys_.action("up"), 0) == sys_.actions(["up"])


@given(systems())
def test_guarded_full_set_is_plain_reachability(sys_):
    idx = build_index(sys_)
    full = sys_.all_processes
    for p, proc in enumerate(sys_.processes):
        for x in range(len(proc.states)):
            # independent oracle: plain graph search inside process p
            seen, stack, hit = {x}, [x], 0
            while stack:
                y = stack.pop()
                hit |= sys_.local_enabled[p][y]
                for d in iter_bits(sys_.local_enabled[p][y]):
                    z = sys_.succ[p][y][d]
                    if z not in seen:
                        seen.add(z)
                        stack.append(z)
            for b in iter_bits(sys_.alphabet[p]):
                assert idx.guarded_reach(p, x, full, b) == bool(hit >> b & 1)
                assert idx.guarded_reach(p, x, 0, b) == bool(sys_.local_enabled[p][x] >> b & 1)


def test_wraps_fig1(f1):
    s0 = f1.initial_state()
    assert wraps(f1, dom_of_mask(f1, f1.actions("bc")), s0)
    assert not wraps(f1, dom_of_mask(f1, f1.actions("c")), s0)
    end = f1.run(s0, f1.parse_word("b c"))
    assert wraps(f1, 0, end)


def test_pifs_fig1(f1):
    idx, s0 = build_index(f1), f1.initial_state()
    assert pifs(idx, s0, f1.actions("e"))
    assert not pifs(idx, s0, f1.actions("c"))
    assert pifs(idx, s0, f1.actions("bc"))
    assert not rpifs(idx, s0, f1.actions("c"))
    ok, acc = apifs(idx, s0, f1.actions("e"))
    assert ok and f1.names(acc) == ["a", "e"]
    assert apifs(idx, s0, f1.actions("c")) == (False, f1.actions("c"))
    end = f1.run(s0, f1.parse_word("e a b"))
    assert apifs(idx, end, f1.actions("c")) == (True, f1.actions("c"))
    assert rpifs(idx, end, 0)


def test_fixpoint_trace_lines(f1):
    lines = fixpoint_trace(build_index(f1), f1.initial_state(), f1.actions("e"))
    assert lines == [
        "round 0: B={e} wraps=False",
        "round 1: added={a} B={a,e} wraps=True",
        "result: True",
    ]


def test_closure_fig1(f1):
    idx, s0 = build_index(f1), f1.initial_state()
    C = closure(idx, s0, f1.action("b"))
    assert set(f1.names(C)) == {"a", "b", "e"}
    assert f1.names(C & f1.enabled(s0)) == ["b", "e"]


def test_closure_and_pset_fig4(f4):
    idx, s0 = build_index(f4), f4.initial_state()
    assert f4.names(closure(idx, s0, f4.action("a"))) == ["a", "b"]
    assert p_closure(idx, s0, f4.action("a")) == f4.all_processes
    assert f4.names(p_set(idx, s0, f4.action("a"))) == ["a", "b", "c"]
    assert f4.names(min_closure(idx, s0)) == ["a", "b"]


def test_pset_contains_closure_fig1(f1):
    idx, s0 = build_index(f1), f1.initial_state()
    b = f1.action("b")
    assert closure(idx, s0, b) & f1.enabled(s0) & ~p_set(idx, s0, b) == 0


def test_min_closure_fig1(f1):
    idx, s0 = build_index(f1), f1.initial_state()
    assert f1.names(min_closure(idx, s0)) == ["b", "e"]
    assert min_closure(idx, s0, f1.enabled(s0)) == 0
    # least enabled action is b under a < b < c < e
    assert f1.names(lex_closure(idx, s0)) == ["b", "e"]
    assert f1.names(lex_closure(idx, s0, f1.actions("b"))) == ["e"]


def test_choose_action_fig1(f1):
    idx, s0 = build_index(f1), f1.initial_state()
    # apifs fails from {b} and {c} and succeeds from {e}
    assert f1.action_names[choose_action(idx, s0, f1.actions("bce"))] == "e"
    assert f1.action_names[choose_action(idx, s0, f1.actions("c"))] == "c"
    end = f1.run(s0, f1.parse_word("b c"))
    assert f1.action_names[choose_action(idx, end, f1.actions("ce"))] == "c"
    with pytest.raises(EmptyCandidates):
        choose_action(idx, s0, 0)


def test_choose_action_falls_back_to_largest(f1):
    idx, s0 = build_index(f1), f1.initial_state()
    # neither b nor c succeeds alone; both accumulate one action, first wins
    assert f1.action_names[choose_action(idx, s0, f1.actions("bc"))] == "b"


def test_triple_budget(f1):
    with pytest.raises(TripleBudgetExceeded):
        build_index(f1, max_triples=0, fallback=False)
    idx = build_index(f1, max_triples=0)
    assert idx.fallback
    assert all(idx.guarded[p] is None for p in idx.fallback)


@given(systems(), st.integers(0, 2**16))
def test_implication_chain(sys_, seed):
    rng = random.Random(seed)
    idx = build_index(sys_)
    for s in reachable(sys_):
        en = sys_.enabled(s)
        for _ in range(5):
            B = rng.getrandbits(sys_.num_actions) & en
            exact = ifs_exact(sys_, s, B)
            p = pifs(idx, s, B)
            assert not exact or p
            assert not p or rpifs(idx, s, B)


@given(systems(), st.integers(0, 2**16))
def test_pifs_monotone_and_apifs_consistent(sys_, seed):
    rng = random.Random(seed)
    idx = build_index(sys_)
    for s in reachable(sys_):
        en = sys_.enabled(s)
        assert pifs(idx, s, en)
        B = rng.getrandbits(sys_.num_actions) & en
        B2 = B | (rng.getrandbits(sys_.num_actions) & en)
        ok, acc = apifs(idx, s, B)
        assert ok == pifs(idx, s, B)
        assert B & ~acc == 0
        if ok:
            assert pifs(idx, s, B2)


@given(systems())
def test_fallback_search_gives_same_answers(sys_):
    full, lazy = build_index(sys_), build_index(sys_, max_triples=0)
    for s in reachable(sys_):
        en = sys_.enabled(s)
        for B in range(1 << popcount(en)):
            mask = 0
            for i, a in enumerate(iter_bits(en)):
                if B >> i & 1:
                    mask |= 1 << a
            assert pifs(full, s, mask) == pifs(lazy, s, mask)


@given(systems())
def test_closure_is_covering_and_inside_pset(sys_):
    idx = build_index(sys_)
    for s in reachable(sys_):
        en = sys_.enabled(s)
        for b in iter_bits(en):
            C = closure(idx, s, b) & en
            assert C >> b & 1
            assert is_covering(sys_, s, C, limit=50_000)
            assert C & ~p_set(idx, s, b) == 0


@given(systems())
def test_pset_is_persistent(sys_):
    idx = build_index(sys_)
    for s in reachable(sys_):
        for b in iter_bits(sys_.enabled(s)):
            assert is_persistent(sys_, s, p_set(idx, s, b), max_len=8)


@given(systems())
def test_min_closure_is_smallest_and_covering(sys_):
    idx = build_index(sys_)
    for s in reachable(sys_):
        en = sys_.enabled(s)
        C = min_closure(idx, s)
        assert C & ~en == 0
        if en:
            assert is_covering(sys_, s, C, limit=50_000)
            assert popcount(C) <= min(popcount(closure(idx, s, b) & en) for b in iter_bits(en))
