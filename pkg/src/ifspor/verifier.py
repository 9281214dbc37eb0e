"""Independent correctness checks for reduced transition systems.

Everything here works from the full product, so it is meant for systems
whose full transition system fits in memory.  Verdicts are three-valued:
running out of a budget gives ``inconclusive``, never ``pass``.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .explorer import ReducedTS
from .fastreach import ReachGraph, reach_graph
from .generators import Cnf
from .model import GlobalState, System
from .traces import OracleLimitExceeded, enumerate_maximal_runs, first_family, lex_normal_form

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

DEFAULT_FAMILY_CAP = 100_000


@dataclass
class Verdict:
    check: str
    status: str
    message: str = ""
    witness: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "status": self.status,
            "message": self.message,
            "witness": self.witness,
            "details": self.details,
        }


def combine(verdicts: Sequence[Verdict]) -> str:
    """``fail`` beats ``inconclusive`` beats ``pass``."""
    statuses = {v.status for v in verdicts}
    if FAIL in statuses:
        return FAIL
    if INCONCLUSIVE in statuses:
        return INCONCLUSIVE
    return PASS


def report_json(verdicts: Sequence[Verdict]) -> str:
    return json.dumps(
        {"status": combine(verdicts), "checks": [v.to_json() for v in verdicts]}, indent=2
    ) + "\n"


# -- full product ------------------------------------------------------------------


@dataclass
class FullTS:
    """All reachable states and product edges; node ids follow the sorted
    state codes of the underlying :class:`ReachGraph`."""

    sys: System
    graph: ReachGraph
    succ: list[list[tuple[int, int]]]

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    @property
    def num_edges(self) -> int:
        return self.graph.num_edges

    @property
    def root(self) -> int:
        return self.graph.root

    def state(self, i: int) -> GlobalState:
        return self.graph.state(i)

    def index_of(self, s: GlobalState) -> int:
        return self.graph.index_of(s)

    def reverse_topological(self) -> list[int]:
        """Node ids, every node after all of its successors."""
        ranks = self.sys.client_rank()
        g = self.graph
        pot = np.zeros(g.num_nodes, dtype=np.int64)
        for p, proc in enumerate(self.sys.processes):
            if proc.is_client:
                r = np.asarray(ranks[p], dtype=np.int64)
                pot += r[(g.codes // g.codec.radix[p]) % g.codec.sizes[p]]
        return np.argsort(-pot, kind="stable").tolist()


def build_full_ts(sys: System, node_limit: int | None = None) -> FullTS:
    """Raises :class:`ifspor.fastreach.StateLimitExceeded` past ``node_limit``."""
    g = reach_graph(sys, node_limit)
    succ: list[list[tuple[int, int]]] = [[] for _ in range(g.num_nodes)]
    for a in sys.sorted_actions(sys.all_actions):
        src, dst = g.action_edges(a)
        for s, d in zip(src.tolist(), dst.tolist()):
            succ[s].append((a, d))
    return FullTS(sys, g, succ)


@dataclass
class FirstFamilies:
    """``First(s)`` for every node of a :class:`FullTS`; ``None`` marks a
    node whose family exceeded the cap (or depends on one that did)."""

    full: FullTS
    families: list[frozenset[int] | None]
    cap: int

    def of_state(self, s: GlobalState) -> frozenset[int] | None:
        return self.families[self.full.index_of(s)]

    @property
    def overflowed(self) -> int:
        return sum(f is None for f in self.families)


def first_sets_bottom_up(ts: FullTS, family_cap: int = DEFAULT_FAMILY_CAP) -> FirstFamilies:
    """``First(s) = {∅}`` at terminal states, otherwise the union over
    ``s -a-> s'`` and ``F ∈ First(s')`` of ``{a} ∪ {b ∈ F : b independent of a}``."""
    deps = ts.sys.dependents
    fams: list[frozenset[int] | None] = [None] * ts.num_nodes
    empty = frozenset({0})
    for v in ts.reverse_topological():
        out = ts.succ[v]
        if not out:
            fams[v] = empty
            continue
        acc: set[int] = set()
        ok = True
        for a, w in out:
            fw = fams[w]
            if fw is None:
                ok = False
                break
            bit = 1 << a
            keep = ~deps[a]
            for F in fw:
                acc.add(bit | (F & keep))
            if len(acc) > family_cap:
                ok = False
                break
        fams[v] = frozenset(acc) if ok else None
    return FirstFamilies(ts, fams, family_cap)


# -- checks ---------------------------------------------------------------------------


def _families_for(sys: System, rts: ReducedTS, families: FirstFamilies | None, cap: int):
    if families is not None:
        return families.of_state
    cache: dict[GlobalState, frozenset[int] | None] = {}

    def lookup(s: GlobalState):
        if s not in cache:
            try:
                cache[s] = first_family(sys, s, cap)
            except OracleLimitExceeded:
                cache[s] = None
        return cache[s]

    return lookup


def check_completeness(
    sys: System,
    rts: ReducedTS,
    families: FirstFamilies | None = None,
    filtered: bool = True,
    family_cap: int = DEFAULT_FAMILY_CAP,
) -> Verdict:
    """Every node's outgoing labels must meet every non-empty ``F ∈ First(s(n))``
    that avoids ``sleep(n)`` (all of them when ``filtered`` is off)."""
    name = "completeness" if filtered else "completeness-unfiltered"
    if rts.partial:
        return Verdict(name, INCONCLUSIVE, "reduced system is a partial exploration")
    first_of = _families_for(sys, rts, families, family_cap)
    labels = [0] * rts.num_nodes
    for src, a, _dst in rts.edges:
        labels[src] |= 1 << a
    unknown = 0
    for n, (s, sleep) in enumerate(zip(rts.states, rts.sleeps)):
        fam = first_of(s)
        if fam is None:
            unknown += 1
            continue
        for F in sorted(fam):
            if F == 0 or (filtered and F & sleep):
                continue
            if not F & labels[n]:
                return Verdict(
                    name,
                    FAIL,
                    f"node {n} misses first set {{{','.join(sys.names(F))}}}",
                    {"node": n, "state": sys.format_state(s), "first_set": sys.names(F),
                     "out_labels": sys.names(labels[n]), "sleep": sys.names(sleep)},
                )
    if unknown:
        return Verdict(name, INCONCLUSIVE, f"{unknown} node(s) exceeded the family cap",
                       details={"unknown_nodes": unknown})
    return Verdict(name, PASS, details={"nodes": rts.num_nodes})


def check_soundness(
    sys: System,
    rts: ReducedTS,
    families: FirstFamilies | None = None,
    family_cap: int = DEFAULT_FAMILY_CAP,
) -> Verdict:
    """Replay every edge; every sink must be terminal or have all of its
    non-empty first sets blocked by its sleep set."""
    if rts.states[rts.root] != sys.initial_state():
        return Verdict("soundness", FAIL, "root is not the initial state", {"node": rts.root})
    for k, (src, a, dst) in enumerate(rts.edges):
        s = rts.states[src]
        if not (sys.enabled(s) >> a) & 1:
            return Verdict("soundness", FAIL, f"edge {k}: {sys.action_names[a]} not enabled",
                           {"edge": k, "src": src, "action": sys.action_names[a], "dst": dst})
        if sys.step(s, a) != rts.states[dst]:
            return Verdict("soundness", FAIL, f"edge {k}: target state mismatch",
                           {"edge": k, "src": src, "action": sys.action_names[a], "dst": dst})
    has_out = [False] * rts.num_nodes
    for src, _a, _dst in rts.edges:
        has_out[src] = True
    first_of = _families_for(sys, rts, families, family_cap)
    terminal = blocked = 0
    for n, s in enumerate(rts.states):
        if has_out[n]:
            continue
        if sys.enabled(s) == 0:
            terminal += 1
            continue
        fam = first_of(s)
        if fam is None:
            return Verdict("soundness", INCONCLUSIVE, f"node {n}: first family over cap", {"node": n})
        sleep = rts.sleeps[n]
        if all(F & sleep for F in fam if F):
            blocked += 1
            continue
        return Verdict("soundness", FAIL, f"node {n} is a non-terminal sink not justified by its sleep set",
                       {"node": n, "state": sys.format_state(s), "sleep": sys.names(sleep)})
    return Verdict("soundness", PASS, details={"terminal_sinks": terminal, "sleep_blocked_sinks": blocked})


def lex_classes(sys: System, limit: int = 100_000) -> set[tuple[int, ...]]:
    """Lexicographic normal forms of all full runs (raises past ``limit`` runs)."""
    s0 = sys.initial_state()
    return {lex_normal_form(sys, r.actions) for r in enumerate_maximal_runs(sys, s0, limit)}


def check_trace_optimality(sys: System, tree: ReducedTS, run_limit: int = 100_000) -> Verdict:
    """(i) every full tree run is its own lex normal form, (ii) tree runs are
    pairwise inequivalent, (iii) there is one tree run per class."""
    try:
        runs = list(tree.full_runs(run_limit))
        classes = lex_classes(sys, run_limit)
    except (OverflowError, OracleLimitExceeded) as exc:
        return Verdict("trace-optimality", INCONCLUSIVE, str(exc))
    details = {"tree_runs": len(runs), "classes": len(classes)}
    forms = set()
    for r in runs:
        nf = lex_normal_form(sys, r)
        if nf != tuple(r):
            return Verdict("trace-optimality", FAIL, "tree run is not lex-minimal",
                           {"run": sys.word(r), "normal_form": sys.word(nf)}, details)
        if nf in forms:
            return Verdict("trace-optimality", FAIL, "two tree runs are equivalent",
                           {"run": sys.word(r)}, details)
        forms.add(nf)
    if forms != classes:
        missing = sorted(classes - forms)
        return Verdict("trace-optimality", FAIL, "tree runs do not match the classes of full runs",
                       {"missing": [sys.word(m) for m in missing[:5]]}, details)
    return Verdict("trace-optimality", PASS, details=details)


def check_completeness_exact(sys: System, rts: ReducedTS, run_limit: int = 100_000) -> Verdict:
    """Class-level completeness by enumeration: every class of full runs of
    the system has a representative among the full runs of ``rts``."""
    try:
        classes = lex_classes(sys, run_limit)
        got = {lex_normal_form(sys, r) for r in rts.full_runs(run_limit)}
    except (OverflowError, OracleLimitExceeded) as exc:
        return Verdict("completeness-exact", INCONCLUSIVE, str(exc))
    missing = classes - got
    if missing:
        w = min(missing)
        return Verdict("completeness-exact", FAIL, "a class of full runs is not represented",
                       {"run": sys.word(w)}, {"classes": len(classes), "represented": len(classes) - len(missing)})
    return Verdict("completeness-exact", PASS, details={"classes": len(classes)})


def verify(
    sys: System,
    rts: ReducedTS,
    full: FullTS | None = None,
    family_cap: int = DEFAULT_FAMILY_CAP,
    node_limit: int | None = None,
) -> list[Verdict]:
    """Soundness and (filtered) completeness against the full product."""
    if full is None:
        full = build_full_ts(sys, node_limit)
    fams = first_sets_bottom_up(full, family_cap)
    return [check_soundness(sys, rts, fams), check_completeness(sys, rts, fams)]


class TooManyVariables(ValueError):
    pass


def sat_truth_table(cnf: Cnf, max_vars: int = 20) -> bool:
    if cnf.num_vars > max_vars:
        raise TooManyVariables(f"{cnf.num_vars} variables exceed the limit of {max_vars}")
    return any(cnf.evaluate(v) for v in itertools.product((False, True), repeat=cnf.num_vars))
