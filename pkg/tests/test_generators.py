from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ifspor.bits import iter_bits
from ifspor.explorer import count_full_paths, explore
from ifspor.generators import (
    Cnf,
    DimacsError,
    all_cnfs,
    builtin_model,
    format_dimacs,
    gen_boolean_gates,
    gen_lowerbound,
    gen_multilocks,
    gen_philosophers,
    gen_sat_ifs,
    parse_dimacs,
    random_cnf,
)
from ifspor.model import ModelError, format_system, parse_system, validate_system
from ifspor.traces import enumerate_maximal_runs, first_set, ifs_exact


def philosophers_bfs(n: int) -> int:
    """State count from a direct simulation: per philosopher a phase,
    forks derived from who holds them."""
    holds = {"m0": (0, 0), "L": (1, 0), "R": (0, 1), "LR": (1, 1), "r": (0, 1), "done": (0, 0)}
    moves = {"m0": [("L", "left"), ("R", "right")], "L": [("LR", "right")], "R": [("LR", "left")],
             "LR": [("r", None)], "r": [("done", None)], "done": []}

    def used(state):
        forks = [False] * n
        for i, ph in enumerate(state):
            left, right = holds[ph]
            if left:
                forks[i] = True
            if right:
                forks[(i + 1) % n] = True
        return forks

    start = ("m0",) * n
    seen, todo = {start}, [start]
    while todo:
        s = todo.pop()
        forks = used(s)
        for i, ph in enumerate(s):
            for nxt, need in moves[ph]:
                if need == "left" and forks[i] or need == "right" and forks[(i + 1) % n]:
                    continue
                t = s[:i] + (nxt,) + s[i + 1:]
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
    return len(seen)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_philosophers_state_count(n):
    expected = philosophers_bfs(n)
    assert expected == 5**n - 1
    assert explore(gen_philosophers(n), "reach").stats.nodes == expected


def test_philosophers_shape():
    sys_ = gen_philosophers(3, meals=2)
    assert validate_system(sys_) == []
    assert sys_.name == "dp3_m2"
    clients = [p.name for p in sys_.processes if p.is_client]
    assert clients == ["P0", "P1", "P2"]
    assert len(sys_.processes) == 6
    # every meal has six transitions per philosopher
    assert len(sys_.processes[0].transitions) == 12
    with pytest.raises(ValueError):
        gen_philosophers(1)


def test_philosophers_deadlock_present():
    sys_ = gen_philosophers(3)
    g = explore(sys_, "reach").graph
    deadlocks = [
        g.state(i) for i in range(g.num_nodes)
        if sys_.enabled(g.state(i)) == 0
        and any(p.states[x] != "m1" for p, x in zip(sys_.processes, g.state(i)) if p.is_client)
    ]
    assert len(deadlocks) == 2  # all hold their left fork, or all their right one


def test_multilocks_deterministic_and_valid():
    a = format_system(gen_multilocks(5, 8, 3, seed=7))
    assert a == format_system(gen_multilocks(5, 8, 3, seed=7))
    assert a != format_system(gen_multilocks(5, 8, 3, seed=8))
    sys_ = parse_system(a)
    assert validate_system(sys_) == []
    for p in sys_.processes:
        if p.is_client:
            assert len(p.transitions) == 6
    with pytest.raises(ValueError):
        gen_multilocks(2, 2, 3, seed=0)


def nand_tree_bfs(height: int) -> int:
    """Reachable states of the gate tree, simulated gate by gate."""
    n = 2 ** (height + 1) - 1
    first_leaf = 2**height - 1
    # gate phase: leaf "0"/"done"; inner "0", ("l", v), ("o", v), "done"
    start = (("0",) * n, (None,) * n)
    seen, todo = {start}, [start]
    while todo:
        phases, wires = todo.pop()
        for g in range(n):
            ph = phases[g]
            nexts = []
            if g >= first_leaf:
                if ph == "0":
                    nexts = [("done", v) for v in (0, 1)]
            elif ph == "0" and wires[2 * g + 1] is not None:
                nexts = [(("l", wires[2 * g + 1]), None)]
            elif isinstance(ph, tuple) and ph[0] == "l" and wires[2 * g + 2] is not None:
                nexts = [(("o", 1 - (ph[1] & wires[2 * g + 2])), None)]
            elif isinstance(ph, tuple) and ph[0] == "o" and g > 0:
                nexts = [("done", ph[1])]
            for nph, w in nexts:
                p2 = phases[:g] + (nph,) + phases[g + 1:]
                w2 = wires if w is None else wires[:g] + (w,) + wires[g + 1:]
                s = (p2, w2)
                if s not in seen:
                    seen.add(s)
                    todo.append(s)
    return len(seen)


@pytest.mark.parametrize("h", [1, 2])
def test_boolean_gates_state_count(h):
    assert explore(gen_boolean_gates(h), "reach").stats.nodes == nand_tree_bfs(h)


def test_boolean_gates_shape():
    sys_ = gen_boolean_gates(3)
    assert sum(p.is_client for p in sys_.processes) == 15
    assert sum(not p.is_client for p in sys_.processes) == 14
    assert validate_system(sys_) == []
    assert count_full_paths(explore(gen_boolean_gates(1)).ts) == 12


def test_boolean_gates_compute_nand():
    sys_ = gen_boolean_gates(2)
    g = explore(sys_).graph
    wire = {p.name: i for i, p in enumerate(sys_.processes)}
    for k in range(g.num_nodes):
        s = g.state(k)
        if sys_.enabled(s):
            continue
        val = {int(name[1:]): int(sys_.processes[i].states[s[i]]) for name, i in wire.items() if name[0] == "W"}
        for gate in (1, 2):
            assert val[gate] == 1 - (val[2 * gate + 1] & val[2 * gate + 2])
        root = sys_.processes[wire["G0"]].states[s[wire["G0"]]]
        assert root == f"o{1 - (val[1] & val[2])}"


def test_sat_gadget_small():
    sat = Cnf.of(1, [[1]])
    unsat = Cnf.of(1, [[1], [-1]])
    for cnf, expected in ((sat, True), (unsat, False)):
        sys_, (s, B) = gen_sat_ifs(cnf)
        assert validate_system(sys_) == []
        assert ifs_exact(sys_, s, B) is expected
        # the full alphabet always contains some first set
        assert ifs_exact(sys_, s, sys_.all_actions)


def test_sat_gadget_shape():
    cnf = Cnf.of(2, [[1, -2, 2]])
    sys_, (s, B) = gen_sat_ifs(cnf)
    names = [p.name for p in sys_.processes]
    assert {"P0_1", "P1_2", "C3_1", "D", "F", "x1", "nx2", "c1", "e1", "f"} <= set(names)
    assert sys_.names(sys_.all_actions & ~B) == ["F.f.up"]
    x1 = sys_.processes[names.index("x1")]
    assert x1.states[s[names.index("x1")]] == "t"


def test_sat_gadget_all_one_var():
    for cnf in all_cnfs(1, 2):
        sys_, (s, B) = gen_sat_ifs(cnf)
        truth = any(cnf.evaluate([v]) for v in (False, True))
        assert ifs_exact(sys_, s, B) == truth, cnf


def _first_sets(sys_):
    return [first_set(sys_, r.actions) for r in enumerate_maximal_runs(sys_, sys_.initial_state())]


def test_lowerbound_unsat_forces_e():
    cnf = Cnf.of(1, [[1], [-1]])
    sys_ = gen_lowerbound(cnf)
    assert validate_system(sys_) == []
    e = sys_.action("e")
    assert all(F >> e & 1 for F in _first_sets(sys_))


def test_lowerbound_sat_has_run_without_e():
    sys_ = gen_lowerbound(Cnf.of(1, [[1]]))
    e, ebar = sys_.action("e"), sys_.action("ebar")
    runs = list(enumerate_maximal_runs(sys_, sys_.initial_state()))
    assert any(ebar in r.actions and not first_set(sys_, r.actions) >> e & 1 for r in runs)


def test_lowerbound_literal_unfolding():
    sys_ = gen_lowerbound(Cnf.of(2, [[1, 1, 2], [1, -2, -2]]))
    c1 = sys_.processes[sys_.process("C_1")]
    cn1 = sys_.processes[sys_.process("Cn_1")]
    assert sum(sys_.action_names[a] == "x1" for _, a, _ in c1.transitions) == 2
    assert sum(sys_.action_names[a] == "nx1" for _, a, _ in cn1.transitions) == 0
    assert "nx1" not in sys_.action_names


def test_dimacs_roundtrip_and_padding():
    text = "c example\np cnf 3 2\n1 -2 0\n3 2 -1 0\n"
    cnf = parse_dimacs(text)
    assert cnf.clauses == ((1, -2, -2), (3, 2, -1))
    assert parse_dimacs(format_dimacs(cnf)) == cnf


@pytest.mark.parametrize("text", [
    "1 2 3 0\n",
    "p cnf 2 1\n1 3 0\n",
    "p cnf 2 2\n1 2 0\n",
    "p cnf 2 1\n1 x 0\n",
    "p dnf 2 1\n1 0\n",
    "p cnf 2 1\n1 2 -1 2 0\n",
    "",
])
def test_dimacs_errors(text):
    with pytest.raises(DimacsError):
        parse_dimacs(text)


@given(st.integers(1, 5), st.integers(1, 6), st.integers(0, 2**32))
def test_dimacs_roundtrip_random(n, m, seed):
    cnf = random_cnf(n, m, random.Random(seed))
    assert parse_dimacs(format_dimacs(cnf)) == cnf


def test_all_cnfs_counts():
    # one variable: clause multisets over {x, -x} of size 3 -> 4 clauses
    assert len(all_cnfs(1, 1)) == 4
    assert len(all_cnfs(1, 2)) == 4 + 6


def test_builtin_model_names():
    assert builtin_model("dp4").name == "dp4"
    assert builtin_model("dp3m2").name == "dp3_m2"
    assert builtin_model("bg2").name == "bg2"
    assert builtin_model("fig6_3").name == "fig6_3"
    assert builtin_model("ml3_4_2s1").name == "ml_3_4_2_s1"
    assert builtin_model("fig6alpha_3").order != builtin_model("fig6_3").order
    with pytest.raises(ModelError):
        builtin_model("nothing")
    for name in ("fig1", "fig4", "fig5"):
        assert list(iter_bits(builtin_model(name).enabled(builtin_model(name).initial_state())))


def test_lowerbound_reduced_size_is_linear():
    from ifspor.explorer import ExploreConfig
    from ifspor.verifier import sat_truth_table

    exact = ExploreConfig("exact-ifs", "enabled", "lex", True, "sleep-subset", name="exact-graph")
    for cnf in all_cnfs(2, 2):
        if sat_truth_table(cnf):
            continue
        sys_ = gen_lowerbound(cnf)
        size = 3 * len(cnf.clauses)
        assert explore(sys_, "full+sleep").stats.nodes <= 6 * size
        assert explore(sys_, exact).stats.nodes <= 6 * size
