from __future__ import annotations

import json

import pytest
from hypothesis import given, settings

from ifspor.explorer import PRESETS, TREE, ExploreConfig, ReducedTS, explore, explore_tree, preset
from ifspor.figures import fig1, fig4, fig5
from ifspor.generators import Cnf, all_cnfs, gen_philosophers
from ifspor.verifier import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    TooManyVariables,
    Verdict,
    build_full_ts,
    check_completeness,
    check_completeness_exact,
    check_soundness,
    check_trace_optimality,
    combine,
    first_sets_bottom_up,
    report_json,
    sat_truth_table,
    verify,
)
from ifspor.traces import first_family

from .conftest import systems


def names_family(sys_, fam):
    return {frozenset(sys_.names(F)) for F in fam}


def test_first_family_fig1():
    sys_ = fig1()
    fams = first_sets_bottom_up(build_full_ts(sys_))
    root = fams.of_state(sys_.initial_state())
    assert names_family(sys_, root) == {frozenset("e"), frozenset("be"), frozenset("bc")}
    assert fams.overflowed == 0


def test_first_family_fig4():
    sys_ = fig4()
    root = first_sets_bottom_up(build_full_ts(sys_)).of_state(sys_.initial_state())
    assert names_family(sys_, root) == {frozenset("ac"), frozenset("b")}


@given(systems())
def test_bottom_up_matches_run_enumeration(sys_):
    full = build_full_ts(sys_)
    fams = first_sets_bottom_up(full)
    for i in range(full.num_nodes):
        s = full.state(i)
        assert fams.families[i] == first_family(sys_, s)


def test_family_cap_overflows():
    sys_ = fig1()
    fams = first_sets_bottom_up(build_full_ts(sys_), family_cap=1)
    assert fams.of_state(sys_.initial_state()) is None
    ts, _ = explore(sys_, "reach")
    v = check_completeness(sys_, ts, fams)
    assert v.status == INCONCLUSIVE


def _only_c_edge(sys_):
    """Root with a single c-edge: misses the first set {e}."""
    s0 = sys_.initial_state()
    c = sys_.action("c")
    s1 = sys_.step(s0, c)
    b = sys_.action("b")
    s2 = sys_.step(s1, b)
    return ReducedTS(sys_, [s0, s1, s2], [0, 0, 0], [(0, c, 1), (1, b, 2)], [TREE, TREE])


def test_completeness_witness():
    sys_ = fig1()
    rts = _only_c_edge(sys_)
    v = check_completeness(sys_, rts)
    assert v.status == FAIL
    assert v.witness["node"] == 0
    assert v.witness["first_set"] == ["e"]
    assert check_soundness(sys_, rts).passed
    assert check_completeness_exact(sys_, rts).status == FAIL


def test_corrupted_edge_is_unsound():
    sys_ = fig1()
    ts, _ = explore(sys_, "full+sleep")
    src, a, dst = ts.edges[0]
    bad = ReducedTS(sys_, ts.states, ts.sleeps, [(src, a, src)] + ts.edges[1:], ts.flags, ts.root)
    v = check_soundness(sys_, bad)
    assert v.status == FAIL and v.witness["edge"] == 0
    disabled = ReducedTS(sys_, ts.states, ts.sleeps, [(dst, a, dst)] + ts.edges[1:], ts.flags, ts.root)
    assert check_soundness(sys_, disabled).status == FAIL


def test_truncated_sink_is_unsound():
    sys_ = fig1()
    s0 = sys_.initial_state()
    rts = ReducedTS(sys_, [s0], [0], [], [])
    v = check_soundness(sys_, rts)
    assert v.status == FAIL and v.witness["node"] == 0
    # the same sink is fine when everything enabled is asleep
    asleep = ReducedTS(sys_, [s0], [sys_.enabled(s0)], [], [])
    assert check_soundness(sys_, asleep).passed


def test_wrong_root_is_unsound():
    sys_ = fig1()
    s1 = sys_.step(sys_.initial_state(), sys_.action("b"))
    assert check_soundness(sys_, ReducedTS(sys_, [s1], [0], [], [])).status == FAIL


def test_partial_is_inconclusive():
    ts, _ = explore(gen_philosophers(4), preset("full+sleep", node_limit=5))
    assert check_completeness(ts.sys, ts).status == INCONCLUSIVE


@pytest.mark.parametrize("name", list(PRESETS))
def test_verify_philosophers(name):
    sys_ = gen_philosophers(4)
    ts, _ = explore(sys_, name)
    verdicts = verify(sys_, ts)
    assert combine(verdicts) == PASS, [v.message for v in verdicts]


def test_unfiltered_mode_is_stricter():
    # sleep sets legitimately skip first sets, which the unfiltered check flags
    failures = 0
    for sys_ in (fig1(), fig5(), gen_philosophers(3)):
        ts, _ = explore(sys_, "full+sleep")
        failures += check_completeness(sys_, ts, filtered=False).status == FAIL
        assert check_completeness(sys_, ts).passed
    assert failures > 0


@pytest.mark.parametrize("sys_,classes", [(fig1(), 3), (fig5(), 2), (fig4(), 2)])
def test_trace_optimality(sys_, classes):
    ts, _ = explore_tree(sys_)
    v = check_trace_optimality(sys_, ts)
    assert v.passed and v.details["classes"] == classes


def test_trace_optimality_rejects_reach_tree():
    sys_ = fig1()
    ts, _ = explore_tree(sys_, ExploreConfig(subsumption="off", name="plain-tree"))
    v = check_trace_optimality(sys_, ts)
    assert v.status == FAIL


@settings(max_examples=30)
@given(systems())
def test_trace_optimality_random(sys_):
    ts, _ = explore_tree(sys_)
    assert check_trace_optimality(sys_, ts, run_limit=200_000).status == PASS


def test_combine_and_json():
    vs = [Verdict("a", PASS), Verdict("b", INCONCLUSIVE)]
    assert combine(vs) == INCONCLUSIVE
    assert combine(vs + [Verdict("c", FAIL)]) == FAIL
    assert combine([]) == PASS
    data = json.loads(report_json(vs))
    assert data["status"] == INCONCLUSIVE and data["checks"][1]["check"] == "b"


def test_sat_truth_table():
    def brute(cnf):
        for bits in range(2**cnf.num_vars):
            val = [(bits >> i) & 1 == 1 for i in range(cnf.num_vars)]
            if all(any(val[abs(l) - 1] == (l > 0) for l in c) for c in cnf.clauses):
                return True
        return False

    for cnf in all_cnfs(2, 2):
        assert sat_truth_table(cnf) == brute(cnf)
    assert not sat_truth_table(Cnf.of(1, [[1], [-1]]))
    with pytest.raises(TooManyVariables):
        sat_truth_table(Cnf.of(21, [[21]]))
